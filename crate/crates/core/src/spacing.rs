//! The LAR spacing test for the entry of `y_{t-1}` and its adaptive and
//! enriched variants, with a tail-stable truncated-Gaussian CDF.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adf::{build_design, ols_fit};
use crate::detrend::{fd_adjust, DeterministicKind};
use crate::error::{invalid, Error, Result};
use crate::lars::{compute_path, PathMode, SolutionPath};
use crate::stats::{ln_normal_cdf, ln_normal_sf, normal_cdf};
use crate::weights::{enriched_weights, j_alpha, ols_weights, resolve_j_lag, PenaltyWeights};

/// `ln(e^a - e^b)` for `a ≥ b`, as `a + ln(1 - e^{b-a})`.
fn ln_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        a
    } else {
        a + (-(b - a).exp_m1()).ln()
    }
}

/// CDF at `x` of `N(μ, σ²)` truncated to `[v_minus, v_plus]`.
///
/// Interval masses are differenced in log space on whichever tail the
/// interval lies in, so intervals far from `μ` stay computable. A mass that
/// is zero relative to the tail it sits in is reported as a numeric error.
pub fn truncated_gaussian_cdf(
    x: f64,
    mu: f64,
    sigma2: f64,
    v_minus: f64,
    v_plus: f64,
) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !(v_minus < v_plus) {
        return Err(invalid(format!(
            "empty truncation interval [{v_minus}, {v_plus}]"
        )));
    }
    if x <= v_minus {
        return Ok(0.0);
    }
    if x >= v_plus {
        return Ok(1.0);
    }
    let s = sigma2.sqrt();
    let (a, z, b) = ((v_minus - mu) / s, (x - mu) / s, (v_plus - mu) / s);
    let value = if a >= 0.0 {
        // upper tail: masses from survival functions
        let (la, lz, lb) = (ln_normal_sf(a), ln_normal_sf(z), ln_normal_sf(b));
        let num = ln_diff_exp(la, lz);
        let den = ln_diff_exp(la, lb);
        check_mass(den - la)?;
        (num - den).exp()
    } else if b <= 0.0 {
        let (la, lz, lb) = (ln_normal_cdf(a), ln_normal_cdf(z), ln_normal_cdf(b));
        let num = ln_diff_exp(lz, la);
        let den = ln_diff_exp(lb, la);
        check_mass(den - lb)?;
        (num - den).exp()
    } else {
        let den = normal_cdf(b) - normal_cdf(a);
        check_mass(den.ln())?;
        (normal_cdf(z) - normal_cdf(a)) / den
    };
    Ok(value.clamp(0.0, 1.0))
}

fn check_mass(ln_rel: f64) -> Result<()> {
    if !(ln_rel > -690.0) {
        return Err(Error::Numeric(
            "truncation interval carries no probability mass".into(),
        ));
    }
    Ok(())
}

/// `[Φ(λ_{l-1}ν/σ) - Φ(λ_lν/σ)] / [Φ(λ_{l-1}ν/σ) - Φ(λ_{l+1}ν/σ)]`;
/// `λ_{l-1} = ∞` is allowed.
pub fn spacing_statistic(
    lambda_prev: f64,
    lambda: f64,
    lambda_next: f64,
    nu: f64,
    sigma: f64,
) -> Result<f64> {
    if !(lambda_prev >= lambda && lambda >= lambda_next && lambda_next >= 0.0) {
        return Err(invalid(format!(
            "knots must satisfy λ_(l-1) ≥ λ_l ≥ λ_(l+1) ≥ 0, got ({lambda_prev}, {lambda}, {lambda_next})"
        )));
    }
    if !(nu > 0.0 && sigma > 0.0) {
        return Err(invalid("ν and σ must be positive"));
    }
    if lambda == lambda_next {
        return Ok(1.0);
    }
    let k = nu / sigma;
    let lp = ln_normal_sf(lambda_prev * k);
    let ll = ln_normal_sf(lambda * k);
    let ln = ln_normal_sf(lambda_next * k);
    let num = ln_diff_exp(ll, lp);
    let den = ln_diff_exp(ln, lp);
    check_mass(den - ln)?;
    Ok((num - den).exp().clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingVariant {
    Plain,
    Adaptive,
    Enriched,
}

impl SpacingVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SpacingVariant::Plain => "spacing_lar",
            SpacingVariant::Adaptive => "spacing_alar",
            SpacingVariant::Enriched => "spacing_alar_ie",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingResult {
    pub variant: SpacingVariant,
    pub p_value: f64,
    /// 1-based LAR step at which `y_{t-1}` entered; 0 if it never did.
    pub step: usize,
    pub nu: f64,
    pub knot_triplet: (f64, f64, f64),
    pub sigma2: f64,
    pub j_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpacingOptions {
    pub gamma1: f64,
    pub gamma2: f64,
    pub j_alpha: f64,
    pub j_replications: usize,
    pub j_lag: Option<usize>,
}

impl Default for SpacingOptions {
    fn default() -> Self {
        let k = crate::knot_tests::KnotOptions::default();
        Self {
            gamma1: k.gamma1,
            gamma2: k.gamma2,
            j_alpha: k.j_alpha,
            j_replications: k.j_replications,
            j_lag: None,
        }
    }
}

/// `‖X_A (X_A'X_A)^{-1} s_A‖₂` on the scaled columns.
fn equiangular_norm(xs: &DMatrix<f64>, active: &[(usize, f64)]) -> Result<DVector<f64>> {
    let n = xs.nrows();
    if active.is_empty() {
        return Ok(DVector::zeros(n));
    }
    let xa = DMatrix::from_fn(n, active.len(), |i, c| xs[(i, active[c].0)]);
    let s = DVector::from_iterator(active.len(), active.iter().map(|a| a.1));
    let chol = xa
        .tr_mul(&xa)
        .cholesky()
        .ok_or_else(|| Error::Numeric("active columns are linearly dependent".into()))?;
    Ok(&xa * chol.solve(&s))
}

/// 1-based entry step, `ν_l` and `(λ_{l-1}, λ_l, λ_{l+1})`.
pub type EntryGeometry = (usize, f64, (f64, f64, f64));

/// `ν_l` and the knot triplet around the entry of `var`.
pub fn entry_geometry(
    path: &SolutionPath,
    x: &DMatrix<f64>,
    var: usize,
) -> Result<Option<EntryGeometry>> {
    let Some(step) = path.activation_step(var) else {
        return Ok(None);
    };
    let xs = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * path.scales[j]);
    let prev_active = if step == 0 {
        Vec::new()
    } else {
        path.knots[step - 1].active.clone()
    };
    let u_now = equiangular_norm(&xs, &path.knots[step].active)?;
    let u_prev = equiangular_norm(&xs, &prev_active)?;
    let nu = (u_now - u_prev).norm();
    let lam_prev = if step == 0 {
        f64::INFINITY
    } else {
        path.knots[step - 1].lambda
    };
    let lam_next = path.knots.get(step + 1).map_or(0.0, |k| k.lambda);
    Ok(Some((
        step + 1,
        nu,
        (lam_prev, path.knots[step].lambda, lam_next),
    )))
}

/// Spacing p-value for the entry of `y_{t-1}` into the LAR path of the ADF
/// regression on FD-adjusted data. The plain variant uses unweighted
/// columns; the adaptive variants use the weight-scaled columns.
pub fn spacing_pvalue<R: Rng + ?Sized>(
    y: &[f64],
    p: usize,
    kind: DeterministicKind,
    variant: SpacingVariant,
    opts: &SpacingOptions,
    rng: Option<&mut R>,
) -> Result<SpacingResult> {
    let adjusted = fd_adjust(y, kind)?;
    let design = build_design(&adjusted, p)?;
    let fit = ols_fit(&design)?;
    let weights = match variant {
        SpacingVariant::Plain => PenaltyWeights::uniform(p),
        SpacingVariant::Adaptive => ols_weights(&fit, opts.gamma1, opts.gamma2)?,
        SpacingVariant::Enriched => {
            let rng = rng.ok_or_else(|| {
                invalid("the enriched spacing test needs a random number generator")
            })?;
            let j = j_alpha(
                y,
                kind,
                opts.j_alpha,
                opts.j_replications,
                resolve_j_lag(y, kind, opts.j_lag)?,
                rng,
            )?;
            enriched_weights(&fit, j, opts.gamma1, opts.gamma2)?
        }
    };
    spacing_with_weights(&design, &weights, fit.sigma2_hat, variant)
}

pub fn spacing_with_weights(
    design: &crate::adf::AdfDesign,
    weights: &PenaltyWeights,
    sigma2: f64,
    variant: SpacingVariant,
) -> Result<SpacingResult> {
    let never = |j_value| SpacingResult {
        variant,
        p_value: 1.0,
        step: 0,
        nu: 0.0,
        knot_triplet: (0.0, 0.0, 0.0),
        sigma2,
        j_value,
    };
    if weights.w1.is_infinite() {
        return Ok(never(weights.j_value));
    }
    let path = compute_path(design, weights, PathMode::Lar)?;
    let x = design.regressors();
    let Some((step, nu, triplet)) = entry_geometry(&path, &x, 0)? else {
        return Ok(never(weights.j_value));
    };
    let p_value = spacing_statistic(triplet.0, triplet.1, triplet.2, nu, sigma2.sqrt())?;
    Ok(SpacingResult {
        variant,
        p_value,
        step,
        nu,
        knot_triplet: triplet,
        sigma2,
        j_value: weights.j_value,
    })
}
