//! Dense least squares on top of a Householder QR factorisation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Columns whose QR pivot falls below this fraction of the column norm are
/// treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// Diagonal of `(X'X)^{-1}`.
    pub xtx_inv_diag: DVector<f64>,
}

pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares> {
    let (n, m) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if m == 0 {
        let rss = y.norm_squared();
        return Ok(LeastSquares {
            coef: DVector::zeros(0),
            residuals: y.clone(),
            rss,
            xtx_inv_diag: DVector::zeros(0),
        });
    }
    if n < m {
        return Err(Error::Singular(format!("{n} rows for {m} columns")));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..m {
        let col_norm = x.column(j).norm();
        if col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norm {
            return Err(Error::Singular(format!("column {j} is linearly dependent")));
        }
    }
    let qty = qr.q().tr_mul(y);
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let residuals = y - x * &coef;
    let rss = residuals.norm_squared();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(m, m))
        .ok_or_else(|| Error::Singular("triangular inverse failed".into()))?;
    let xtx_inv_diag = DVector::from_iterator(m, r_inv.row_iter().map(|row| row.norm_squared()));
    Ok(LeastSquares {
        coef,
        residuals,
        rss,
        xtx_inv_diag,
    })
}

/// Orthonormal basis for the span of the intercept and a linear trend
/// `t = 1..n`, used to partial these regressors out in closed form.
#[derive(Debug, Clone)]
pub(crate) struct TrendProjector {
    unit: Vec<f64>,
    slope: Vec<f64>,
}

impl TrendProjector {
    pub(crate) fn new(n: usize) -> Self {
        let nf = n as f64;
        let unit = vec![1.0 / nf.sqrt(); n];
        let centre = (nf + 1.0) / 2.0;
        let mut slope: Vec<f64> = (1..=n).map(|t| t as f64 - centre).collect();
        let norm = slope.iter().map(|v| v * v).sum::<f64>().sqrt();
        slope.iter_mut().for_each(|v| *v /= norm);
        Self { unit, slope }
    }

    /// Replaces `v` with its residual after regressing on `(1, t)`.
    pub(crate) fn residualize(&self, v: &mut [f64]) {
        let a = dot(&self.unit, v);
        let b = dot(&self.slope, v);
        for ((x, u), s) in v.iter_mut().zip(&self.unit).zip(&self.slope) {
            *x -= a * u + b * s;
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
