//! Removal of deterministic components (constant, linear trend) ahead of
//! estimation.
//!
//! Three adjusters are provided, matching how each family of tests consumes
//! its data: first-difference style adjustment for the activation-knot and
//! spacing tests, OLS residuals for the `J_α` statistic, and ERS-style GLS
//! quasi-differencing for ADF-GLS and `MZ_t`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::least_squares;

/// Deterministic component `z_t`: `()`, `(1)` or `(1, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeterministicKind {
    #[default]
    None,
    Constant,
    LinearTrend,
}

impl DeterministicKind {
    /// Number of deterministic regressors in `z_t`.
    pub fn dim(self) -> usize {
        match self {
            DeterministicKind::None => 0,
            DeterministicKind::Constant => 1,
            DeterministicKind::LinearTrend => 2,
        }
    }

    /// `z_t` for `t = 1..=n`, one row per observation.
    pub fn regressors(self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(
            n,
            self.dim(),
            |i, j| if j == 0 { 1.0 } else { (i + 1) as f64 },
        )
    }

    /// GLS quasi-differencing constant used by the ERS convention.
    pub fn default_c_bar(self) -> f64 {
        match self {
            DeterministicKind::LinearTrend => -13.5,
            _ => -7.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeterministicKind::None => "none",
            DeterministicKind::Constant => "constant",
            DeterministicKind::LinearTrend => "linear_trend",
        }
    }
}

impl std::fmt::Display for DeterministicKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DeterministicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(DeterministicKind::None),
            "constant" | "const" | "c" => Ok(DeterministicKind::Constant),
            "linear_trend" | "trend" | "ct" => Ok(DeterministicKind::LinearTrend),
            other => Err(invalid(format!("unknown deterministic kind '{other}'"))),
        }
    }
}

/// Which adjuster produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum DetrendMethod {
    Fd,
    Ols,
    Gls { c_bar: f64 },
}

/// First-difference adjustment: `y_t - y_1` for a constant and
/// `y_t - y_1 - (t/T)(y_T - y_1)` for a linear trend.
pub fn fd_adjust(y: &[f64], kind: DeterministicKind) -> Result<Vec<f64>> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidLength { needed: 2, got: n });
    }
    let first = y[0];
    Ok(match kind {
        DeterministicKind::None => y.to_vec(),
        DeterministicKind::Constant => y.iter().map(|v| v - first).collect(),
        DeterministicKind::LinearTrend => {
            let span = y[n - 1] - first;
            let nf = n as f64;
            let mut out: Vec<f64> = y
                .iter()
                .enumerate()
                .map(|(i, v)| v - first - ((i + 1) as f64 / nf) * span)
                .collect();
            // t/T = 1 at the endpoint; pin it so rounding cannot leave a residue
            out[n - 1] = 0.0;
            out
        }
    })
}

/// Residuals from regressing `y` on `z_t`.
pub fn ols_adjust(y: &[f64], kind: DeterministicKind) -> Result<Vec<f64>> {
    let n = y.len();
    if kind == DeterministicKind::None {
        return Ok(y.to_vec());
    }
    if n <= kind.dim() {
        return Err(Error::InvalidLength {
            needed: kind.dim() + 1,
            got: n,
        });
    }
    let fit = least_squares(&kind.regressors(n), &DVector::from_column_slice(y))?;
    Ok(fit.residuals.iter().copied().collect())
}

/// GLS adjustment with quasi-differencing at `ā = 1 + c̄/T`.
pub fn gls_adjust(y: &[f64], kind: DeterministicKind, c_bar: f64) -> Result<Vec<f64>> {
    let n = y.len();
    if kind == DeterministicKind::None {
        return Err(invalid("GLS adjustment needs a deterministic component"));
    }
    if n < 3 {
        return Err(Error::InvalidLength { needed: 3, got: n });
    }
    if !(c_bar <= 0.0) {
        return Err(invalid(format!("c_bar must be non-positive, got {c_bar}")));
    }
    let a_bar = 1.0 + c_bar / n as f64;
    let z = kind.regressors(n);
    let mut yq = DVector::zeros(n);
    let mut zq = DMatrix::zeros(n, kind.dim());
    yq[0] = y[0];
    zq.row_mut(0).copy_from(&z.row(0));
    for t in 1..n {
        yq[t] = y[t] - a_bar * y[t - 1];
        let row = z.row(t) - z.row(t - 1) * a_bar;
        zq.row_mut(t).copy_from(&row);
    }
    let theta = least_squares(&zq, &yq)?.coef;
    let fitted = &z * theta;
    Ok(y.iter().zip(fitted.iter()).map(|(v, f)| v - f).collect())
}
