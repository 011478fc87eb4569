//! Lag-order selection by the modified AIC and the autoregressive spectral
//! estimator of the long-run variance.

use serde::{Deserialize, Serialize};

use crate::adf::{build_design, ols_fit, AdfDesign};
use crate::detrend::{gls_adjust, DeterministicKind};
use crate::error::{Error, Result};

/// `⌊12 (T/100)^{1/4}⌋`.
pub fn default_kmax(t_len: usize) -> usize {
    (12.0 * (t_len as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Largest lag bound for which an ADF design on `t_len` points still has
/// more rows than parameters.
pub fn feasible_kmax(t_len: usize) -> usize {
    default_kmax(t_len).min(t_len.saturating_sub(4) / 2)
}

/// Which residuals enter `σ̃²_k` during the MAIC scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaicSample {
    /// Every lag is fitted on the rows usable at `k_max`.
    #[default]
    Common,
    /// Each lag is fitted on all rows available to it; the criterion is
    /// still normalised by the common-sample size.
    PerLag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub k_hat: usize,
    pub k_max: usize,
    /// MAIC for `k = 0..=k_max`.
    pub maic_values: Vec<f64>,
    /// `ω̂²_AR(k_hat)`.
    pub lrv: f64,
}

/// `log σ̃² + 2 (τ_T + k) / n_eff`.
pub fn maic_value(sigma2: f64, tau_t: f64, k: usize, n_eff: usize) -> f64 {
    sigma2.ln() + 2.0 * (tau_t + k as f64) / n_eff as f64
}

fn maic_on_common(common: &AdfDesign, y_d: &[f64], k: usize, sample: MaicSample) -> Result<f64> {
    let n_eff = common.n();
    let (rss, xi0) = match sample {
        MaicSample::Common => {
            let fit = ols_fit(&common.with_lags(k))?;
            (fit.rss, fit.rho_hat)
        }
        MaicSample::PerLag => {
            let fit = ols_fit(&build_design(y_d, k)?)?;
            (fit.rss, fit.rho_hat)
        }
    };
    let sigma2 = rss / n_eff as f64;
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate(format!("σ̃² is zero at lag {k}")));
    }
    let level_ss: f64 = common.level.iter().map(|v| v * v).sum();
    let tau_t = xi0 * xi0 * level_ss / sigma2;
    Ok(maic_value(sigma2, tau_t, k, n_eff))
}

/// MAIC at lag `k` with the common estimation sample of `k_max`.
pub fn maic(y_d: &[f64], k: usize, k_max: usize) -> Result<f64> {
    maic_with(y_d, k, k_max, MaicSample::Common)
}

pub fn maic_with(y_d: &[f64], k: usize, k_max: usize, sample: MaicSample) -> Result<f64> {
    if k > k_max {
        return Err(Error::InvalidArgument(format!(
            "lag {k} exceeds k_max {k_max}"
        )));
    }
    let common = build_design(y_d, k_max)?;
    maic_on_common(&common, y_d, k, sample)
}

/// Scans `k = 0..=k_max` and returns the MAIC minimiser (ties to the
/// smallest lag) together with the AR long-run variance at that lag.
pub fn select_lag(y_d: &[f64], k_max: usize, sample: MaicSample) -> Result<LagSelection> {
    let common = build_design(y_d, k_max)?;
    let maic_values = (0..=k_max)
        .map(|k| maic_on_common(&common, y_d, k, sample))
        .collect::<Result<Vec<f64>>>()?;
    let mut k_hat = 0;
    for (k, v) in maic_values.iter().enumerate() {
        if *v < maic_values[k_hat] {
            k_hat = k;
        }
    }
    let lrv = ar_lrv(y_d, k_hat)?;
    Ok(LagSelection {
        k_hat,
        k_max,
        maic_values,
        lrv,
    })
}

/// `σ² / (1 - Σ δ_j)²`.
pub fn ar_spectral_lrv(sigma2: f64, deltas: &[f64]) -> Result<f64> {
    let denom = 1.0 - deltas.iter().sum::<f64>();
    if denom.abs() <= 1e-8 {
        return Err(Error::Numeric(format!(
            "AR long-run variance undefined: 1 - Σδ = {denom:e}"
        )));
    }
    Ok(sigma2 / (denom * denom))
}

/// Autoregressive spectral density at frequency zero from an ADF(k) fit of
/// the adjusted series.
pub fn ar_lrv(y_d: &[f64], k: usize) -> Result<f64> {
    let fit = ols_fit(&build_design(y_d, k)?)?;
    ar_spectral_lrv(fit.sigma2_hat, &fit.delta_hat)
}

/// How lag orders are chosen for a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagRule {
    Fixed(usize),
    /// MAIC over `0..=k_max` on GLS-adjusted data, `k_max = ⌊12 (T/100)^{1/4}⌋`
    /// capped by what the sample supports.
    #[default]
    Maic,
}

/// GLS adjustment at the default `c̄`, or the raw series when there is no
/// deterministic component.
pub fn gls_or_raw(y: &[f64], kind: DeterministicKind) -> Result<Vec<f64>> {
    match kind {
        DeterministicKind::None => Ok(y.to_vec()),
        _ => gls_adjust(y, kind, kind.default_c_bar()),
    }
}

/// Lag order for `y` under `rule`; MAIC runs on [`gls_or_raw`] data.
pub fn resolve_lag(y: &[f64], kind: DeterministicKind, rule: LagRule) -> Result<usize> {
    match rule {
        LagRule::Fixed(k) => Ok(k),
        LagRule::Maic => {
            let y_d = gls_or_raw(y, kind)?;
            Ok(select_lag(&y_d, feasible_kmax(y.len()), MaicSample::Common)?.k_hat)
        }
    }
}
