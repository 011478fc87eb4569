//! Adaptive penalty weights for the ADF regressors.
//!
//! The OLS weights are `w_1 = 1/|ρ̂|` and `w_{2,j} = 1/|δ̂_j|`. The enriched
//! weight replaces `w_1` by `J_α / |ρ̂|`, where `J_α` is the interquantile
//! range of slopes obtained by regressing the LRV-scaled series on
//! independent simulated random walks. `J_α` is small for stationary data,
//! so enrichment pushes the activation of `y_{t-1}` further up the path.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adf::OlsFit;
use crate::detrend::{ols_adjust, DeterministicKind};
use crate::error::{invalid, Error, Result};
use crate::lag_select::{ar_lrv, resolve_lag, LagRule};
use crate::linalg::{dot, TrendProjector};
use crate::stats::{quantile_sorted, sort_floats};

/// Default quantile level and replication count for `J_α`.
pub const J_ALPHA_DEFAULT: f64 = 0.1;
pub const J_REPLICATIONS_DEFAULT: usize = 150;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    /// Weight of `y_{t-1}`; `+∞` excludes it from the path.
    pub w1: f64,
    pub w2: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub j_value: Option<f64>,
}

fn check_gammas(gamma1: f64, gamma2: f64) -> Result<()> {
    if !(gamma1 > 0.5) {
        return Err(invalid(format!("gamma1 must exceed 1/2, got {gamma1}")));
    }
    if !(gamma2 > 0.0) {
        return Err(invalid(format!("gamma2 must be positive, got {gamma2}")));
    }
    Ok(())
}

fn inverse_abs(v: f64) -> f64 {
    if v == 0.0 {
        f64::INFINITY
    } else {
        1.0 / v.abs()
    }
}

impl PenaltyWeights {
    pub fn new(w1: f64, w2: Vec<f64>, gamma1: f64, gamma2: f64) -> Result<Self> {
        check_gammas(gamma1, gamma2)?;
        if std::iter::once(&w1).chain(&w2).any(|w| !(*w > 0.0)) {
            return Err(invalid("penalty weights must be positive"));
        }
        Ok(Self {
            w1,
            w2,
            gamma1,
            gamma2,
            j_value: None,
        })
    }

    /// Unit weights: the plain (non-adaptive) Lasso/LAR.
    pub fn uniform(p: usize) -> Self {
        Self {
            w1: 1.0,
            w2: vec![1.0; p],
            gamma1: 1.0,
            gamma2: 1.0,
            j_value: None,
        }
    }

    pub fn len(&self) -> usize {
        self.w2.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Effective penalty factors `w^γ` per column, `y_{t-1}` first.
    pub fn penalties(&self) -> Vec<f64> {
        std::iter::once(self.w1.powf(self.gamma1))
            .chain(self.w2.iter().map(|w| w.powf(self.gamma2)))
            .collect()
    }

    /// Column multipliers `w^{-γ}`; zero for infinite weights.
    pub fn column_scales(&self) -> Vec<f64> {
        self.penalties()
            .into_iter()
            .map(|p| if p.is_infinite() { 0.0 } else { 1.0 / p })
            .collect()
    }
}

pub fn ols_weights(fit: &OlsFit, gamma1: f64, gamma2: f64) -> Result<PenaltyWeights> {
    check_gammas(gamma1, gamma2)?;
    Ok(PenaltyWeights {
        w1: inverse_abs(fit.rho_hat),
        w2: fit.delta_hat.iter().map(|d| inverse_abs(*d)).collect(),
        gamma1,
        gamma2,
        j_value: None,
    })
}

/// OLS weights with `w̆_1 = J / |ρ̂|`.
pub fn enriched_weights(
    fit: &OlsFit,
    j_value: f64,
    gamma1: f64,
    gamma2: f64,
) -> Result<PenaltyWeights> {
    if !(j_value > 0.0) || !j_value.is_finite() {
        return Err(invalid(format!(
            "J must be positive and finite, got {j_value}"
        )));
    }
    let mut w = ols_weights(fit, gamma1, gamma2)?;
    w.w1 = if fit.rho_hat == 0.0 {
        f64::INFINITY
    } else {
        j_value / fit.rho_hat.abs()
    };
    w.j_value = Some(j_value);
    Ok(w)
}

/// `|q_{1-α/2} - q_{α/2}|` of the simulated slopes (type-7 quantiles).
pub fn j_from_slopes(slopes: &mut [f64], alpha: f64) -> f64 {
    sort_floats(slopes);
    (quantile_sorted(slopes, 1.0 - alpha / 2.0) - quantile_sorted(slopes, alpha / 2.0)).abs()
}

/// AR order of the LRV inside `J_α`: `j_lag` when given, else the MAIC
/// choice for `y`.
pub fn resolve_j_lag(y: &[f64], kind: DeterministicKind, j_lag: Option<usize>) -> Result<usize> {
    match j_lag {
        Some(k) => Ok(k),
        None => resolve_lag(y, kind, LagRule::Maic),
    }
}

/// The `J_α` range statistic.
///
/// `y` is OLS-adjusted for `kind`, scaled by `ω̂_AR(k)^{-1}`, then regressed
/// on `(1, t, x^{(r)})` for `replications` zero-start Gaussian random walks
/// `x^{(r)}`.
pub fn j_alpha<R: Rng + ?Sized>(
    y: &[f64],
    kind: DeterministicKind,
    alpha: f64,
    replications: usize,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(invalid(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    if replications < 20 {
        return Err(invalid(format!(
            "J needs at least 20 replications, got {replications}"
        )));
    }
    let adjusted = ols_adjust(y, kind)?;
    let omega = ar_lrv(&adjusted, k)?.sqrt();
    let n = adjusted.len();
    let projector = TrendProjector::new(n);
    let mut target: Vec<f64> = adjusted.iter().map(|v| v / omega).collect();
    projector.residualize(&mut target);

    let mut walk = vec![0.0; n];
    let mut slopes = Vec::with_capacity(replications);
    for _ in 0..replications {
        let mut acc = 0.0;
        for v in walk.iter_mut() {
            acc += rng.sample::<f64, _>(StandardNormal);
            *v = acc;
        }
        projector.residualize(&mut walk);
        let sxx = dot(&walk, &walk);
        if !(sxx > 0.0) {
            return Err(Error::Numeric("simulated regressor collapsed".into()));
        }
        slopes.push(dot(&walk, &target) / sxx);
    }
    Ok(j_from_slopes(&mut slopes, alpha))
}
