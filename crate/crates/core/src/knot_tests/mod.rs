//! Activation-knot unit root tests.
//!
//! `τ = T^{γ₁-1} λ₀ / σ̂²`, where `λ₀` is the knot at which `y_{t-1}` first
//! enters the adaptive-Lasso path of the ADF regression on FD-adjusted data.
//! `τ̆` is the same statistic with the enriched weight on `y_{t-1}`.
//! Large values reject the unit root.

mod null;

pub use null::{
    critical_values, p_value, simulate_null_asymptotic, simulate_null_finite, JCoupling,
    NullDistribution, NullEngine,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adf::{build_design, ols_fit, AdfDesign, OlsFit};
use crate::detrend::{fd_adjust, DeterministicKind};
use crate::error::Result;
use crate::lars::{compute_path, PathMode};
use crate::weights::{
    enriched_weights, j_alpha, ols_weights, resolve_j_lag, PenaltyWeights, J_ALPHA_DEFAULT,
    J_REPLICATIONS_DEFAULT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauVariant {
    Tau,
    TauIe,
}

impl TauVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            TauVariant::Tau => "tau",
            TauVariant::TauIe => "tau_ie",
        }
    }
}

impl std::fmt::Display for TauVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TauVariant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(TauVariant::Tau),
            "tau_ie" | "tau-ie" => Ok(TauVariant::TauIe),
            other => Err(crate::error::invalid(format!(
                "unknown knot test '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnotOptions {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Quantile level of `J_α`.
    pub j_alpha: f64,
    pub j_replications: usize,
    /// AR order of the LRV inside `J_α`; chosen by MAIC when unset.
    pub j_lag: Option<usize>,
}

impl Default for KnotOptions {
    fn default() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
            j_alpha: J_ALPHA_DEFAULT,
            j_replications: J_REPLICATIONS_DEFAULT,
            j_lag: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotTestResult {
    pub variant: TauVariant,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub detrending: DeterministicKind,
    pub lag_order: usize,
    pub t_len: usize,
    pub sigma2: f64,
    pub j_value: Option<f64>,
    /// Activation knot of `y_{t-1}`; absent if it never enters.
    pub lambda0: Option<f64>,
}

impl KnotTestResult {
    pub fn with_null(mut self, null: &NullDistribution) -> Self {
        self.p_value = Some(p_value(self.statistic, null));
        self
    }
}

/// FD-adjusted ADF design and its OLS fit, shared by the path-based tests.
#[derive(Debug, Clone)]
pub struct PreparedSeries {
    pub design: AdfDesign,
    pub fit: OlsFit,
}

impl PreparedSeries {
    pub fn new(y: &[f64], p: usize, kind: DeterministicKind) -> Result<Self> {
        let adjusted = fd_adjust(y, kind)?;
        let design = build_design(&adjusted, p)?;
        let fit = ols_fit(&design)?;
        Ok(Self { design, fit })
    }
}

fn prepare(y: &[f64], p: usize, kind: DeterministicKind) -> Result<PreparedSeries> {
    PreparedSeries::new(y, p, kind)
}

/// Knot statistic for prepared data under the given weights.
pub fn knot_statistic(
    prep: &PreparedSeries,
    weights: &PenaltyWeights,
    variant: TauVariant,
    kind: DeterministicKind,
    t_len: usize,
) -> Result<KnotTestResult> {
    let lambda0 = if weights.w1.is_infinite() {
        None
    } else {
        compute_path(&prep.design, weights, PathMode::Lasso)?.activation_knot(0)
    };
    let sigma2 = prep.fit.sigma2_hat;
    let statistic = match lambda0 {
        Some(l) => (t_len as f64).powf(weights.gamma1 - 1.0) * l / sigma2,
        None => 0.0,
    };
    Ok(KnotTestResult {
        variant,
        statistic,
        p_value: None,
        gamma1: weights.gamma1,
        gamma2: weights.gamma2,
        detrending: kind,
        lag_order: prep.design.p,
        t_len,
        sigma2,
        j_value: weights.j_value,
        lambda0,
    })
}

/// `τ` on `y` with `p` lagged differences after FD adjustment for `kind`.
pub fn tau_statistic(
    y: &[f64],
    p: usize,
    kind: DeterministicKind,
    opts: &KnotOptions,
) -> Result<KnotTestResult> {
    let prep = prepare(y, p, kind)?;
    let weights = ols_weights(&prep.fit, opts.gamma1, opts.gamma2)?;
    knot_statistic(&prep, &weights, TauVariant::Tau, kind, y.len())
}

/// `τ̆`: `τ` with `w̆₁ = J_α / |ρ̂|`. `J_α` is computed on the raw series
/// with OLS adjustment for `kind`.
pub fn tau_ie_statistic<R: Rng + ?Sized>(
    y: &[f64],
    p: usize,
    kind: DeterministicKind,
    opts: &KnotOptions,
    rng: &mut R,
) -> Result<KnotTestResult> {
    let prep = prepare(y, p, kind)?;
    let j = j_alpha(
        y,
        kind,
        opts.j_alpha,
        opts.j_replications,
        resolve_j_lag(y, kind, opts.j_lag)?,
        rng,
    )?;
    let weights = enriched_weights(&prep.fit, j, opts.gamma1, opts.gamma2)?;
    knot_statistic(&prep, &weights, TauVariant::TauIe, kind, y.len())
}

/// `τ` and `τ̆` from one design fit and one `J` draw.
pub fn tau_pair<R: Rng + ?Sized>(
    y: &[f64],
    p: usize,
    kind: DeterministicKind,
    opts: &KnotOptions,
    rng: &mut R,
) -> Result<(KnotTestResult, KnotTestResult)> {
    let prep = prepare(y, p, kind)?;
    let plain = ols_weights(&prep.fit, opts.gamma1, opts.gamma2)?;
    let tau = knot_statistic(&prep, &plain, TauVariant::Tau, kind, y.len())?;
    let j = j_alpha(
        y,
        kind,
        opts.j_alpha,
        opts.j_replications,
        resolve_j_lag(y, kind, opts.j_lag)?,
        rng,
    )?;
    let enriched = enriched_weights(&prep.fit, j, opts.gamma1, opts.gamma2)?;
    let tau_ie = knot_statistic(&prep, &enriched, TauVariant::TauIe, kind, y.len())?;
    Ok((tau, tau_ie))
}

/// `τ` from an explicit weight vector; used to check the enrichment identity.
pub fn tau_with_weights(
    y: &[f64],
    kind: DeterministicKind,
    weights: &PenaltyWeights,
) -> Result<KnotTestResult> {
    let prep = prepare(y, weights.w2.len(), kind)?;
    let variant = if weights.j_value.is_some() {
        TauVariant::TauIe
    } else {
        TauVariant::Tau
    };
    knot_statistic(&prep, weights, variant, kind, y.len())
}
