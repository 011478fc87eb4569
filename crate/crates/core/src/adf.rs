//! ADF regression designs and their OLS fits.
//!
//! The regression is `Δy_t = ρ y_{t-1} + Σ_{j=1}^p δ_j Δy_{t-j} + ε_t` without
//! deterministic terms; data are adjusted beforehand by [`crate::detrend`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::least_squares;

/// Response and regressors of an ADF(p) regression over rows `t = p+2..=T`
/// (1-based), so `n = T - p - 1`.
#[derive(Debug, Clone)]
pub struct AdfDesign {
    pub response: Vec<f64>,
    pub level: Vec<f64>,
    /// `n × p`; column `j-1` holds `Δy_{t-j}`.
    pub lags: DMatrix<f64>,
    pub p: usize,
    pub t_len: usize,
}

impl AdfDesign {
    pub fn n(&self) -> usize {
        self.response.len()
    }

    /// `[y_{t-1}, Δy_{t-1}, …, Δy_{t-p}]` as an `n × (p+1)` matrix.
    pub fn regressors(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut x = DMatrix::zeros(n, self.p + 1);
        x.column_mut(0).copy_from_slice(&self.level);
        if self.p > 0 {
            x.columns_mut(1, self.p).copy_from(&self.lags);
        }
        x
    }

    pub fn response_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.response)
    }

    /// Same rows, keeping only the first `k` lag columns.
    pub fn with_lags(&self, k: usize) -> AdfDesign {
        assert!(k <= self.p, "cannot widen a design");
        AdfDesign {
            response: self.response.clone(),
            level: self.level.clone(),
            lags: self.lags.columns(0, k).into_owned(),
            p: k,
            t_len: self.t_len,
        }
    }
}

/// Builds the ADF(p) design from a (pre-adjusted) series.
pub fn build_design(y: &[f64], p: usize) -> Result<AdfDesign> {
    let t_len = y.len();
    let needed = (p + 4).max(2 * p + 3);
    if t_len < needed {
        return Err(Error::InvalidLength { needed, got: t_len });
    }
    let n = t_len - p - 1;
    // zero-based: row i corresponds to t = i + p + 1
    let dy = |t: usize| y[t] - y[t - 1];
    let response: Vec<f64> = (0..n).map(|i| dy(i + p + 1)).collect();
    let level: Vec<f64> = (0..n).map(|i| y[i + p]).collect();
    let lags = DMatrix::from_fn(n, p, |i, j| dy(i + p - j));
    Ok(AdfDesign {
        response,
        level,
        lags,
        p,
        t_len,
    })
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub rho_hat: f64,
    pub delta_hat: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual sum of squares divided by the number of regression rows,
    /// which for a full ADF(p) design is `T - p - 1`.
    pub sigma2_hat: f64,
    /// Conventional t-ratios with `n - (p+1)` degrees of freedom, `ρ` first.
    pub t_ratios: Vec<f64>,
    pub rss: f64,
}

impl OlsFit {
    pub fn coefficients(&self) -> Vec<f64> {
        std::iter::once(self.rho_hat)
            .chain(self.delta_hat.iter().copied())
            .collect()
    }
}

/// OLS fit of an ADF design via QR.
pub fn ols_fit(design: &AdfDesign) -> Result<OlsFit> {
    let y = design.response_vector();
    let tss = y.norm_squared();
    if tss == 0.0 {
        return Err(Error::Degenerate(
            "differenced series is identically zero".into(),
        ));
    }
    let x = design.regressors();
    let ls = least_squares(&x, &y)?;
    let n = design.n();
    let k = design.p + 1;
    if ls.rss <= 1e-20 * tss {
        return Err(Error::Degenerate(
            "ADF regression fits exactly; residual variance is zero".into(),
        ));
    }
    let sigma2_hat = ls.rss / n as f64;
    let s2 = if n > k {
        ls.rss / (n - k) as f64
    } else {
        f64::NAN
    };
    let t_ratios = ls
        .coef
        .iter()
        .zip(ls.xtx_inv_diag.iter())
        .map(|(b, v)| b / (s2 * v).sqrt())
        .collect();
    Ok(OlsFit {
        rho_hat: ls.coef[0],
        delta_hat: ls.coef.iter().skip(1).copied().collect(),
        residuals: ls.residuals.iter().copied().collect(),
        sigma2_hat,
        t_ratios,
        rss: ls.rss,
    })
}

/// `σ̂² = (T - p - 1)^{-1} Σ ε̂²`.
pub fn innovation_variance(residuals: &[f64], t_len: usize, p: usize) -> f64 {
    residuals.iter().map(|e| e * e).sum::<f64>() / (t_len - p - 1) as f64
}
