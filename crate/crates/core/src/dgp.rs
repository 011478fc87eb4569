//! Data-generating processes for the simulation experiments.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DEFAULT_BURN_IN: usize = 50;

/// Near-integrated series `y_t = (1 + c/T) y_{t-1} + v_t` with ARMA(1,1)
/// errors `v_t = φ v_{t-1} + ϑ ε_{t-1} + ε_t`, started at zero and run for
/// `T + burn_in` steps of which the first `burn_in` are dropped.
pub fn gen_arma_near_ur<R: Rng + ?Sized>(
    t_len: usize,
    c: f64,
    phi: f64,
    theta: f64,
    burn_in: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(c <= 0.0) {
        return Err(invalid(format!("c must be non-positive, got {c}")));
    }
    if !(phi.abs() < 1.0) {
        return Err(invalid(format!("|phi| must be below one, got {phi}")));
    }
    if t_len == 0 {
        return Err(invalid("T must be positive"));
    }
    let a = 1.0 + c / t_len as f64;
    let (mut y, mut v, mut e_prev) = (0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(t_len);
    for step in 0..t_len + burn_in {
        let e: f64 = rng.sample(StandardNormal);
        v = phi * v + theta * e_prev + e;
        e_prev = e;
        y = a * y + v;
        if step >= burn_in {
            out.push(y);
        }
    }
    Ok(out)
}

/// Moduli of the roots of the level AR polynomial implied by
/// `Δy_t = ρ y_{t-1} + Σ δ_j Δy_{t-j} + v_t`, as companion eigenvalues.
pub fn level_ar_root_moduli(rho: f64, deltas: &[f64]) -> Vec<f64> {
    let k = deltas.len();
    // y_t = (1 + ρ + δ₁) y_{t-1} + Σ_{j=2}^{k} (δ_j - δ_{j-1}) y_{t-j} - δ_k y_{t-k-1}
    let mut a = vec![0.0; k + 1];
    a[0] = 1.0 + rho + deltas.first().copied().unwrap_or(0.0);
    for j in 1..k {
        a[j] = deltas[j] - deltas[j - 1];
    }
    if k > 0 {
        a[k] = -deltas[k - 1];
    }
    companion_moduli(&a)
}

fn companion_moduli(a: &[f64]) -> Vec<f64> {
    let m = a.len();
    if m == 0 {
        return Vec::new();
    }
    let comp = DMatrix::from_fn(m, m, |i, j| {
        if i == 0 {
            a[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut mods: Vec<f64> = comp
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    mods.sort_by(|x, y| y.total_cmp(x));
    mods
}

/// Checks that the ADF-form coefficients give a stationary series
/// (`ρ < 0`) or a unit root with stationary differences (`ρ = 0`).
pub fn check_adf_form(rho: f64, deltas: &[f64]) -> Result<()> {
    if !(rho > -2.0 && rho <= 0.0) {
        return Err(invalid(format!("rho_star must lie in (-2, 0], got {rho}")));
    }
    let moduli = if rho == 0.0 {
        companion_moduli(deltas)
    } else {
        level_ar_root_moduli(rho, deltas)
    };
    if let Some(&largest) = moduli.first() {
        if largest >= 1.0 - 1e-10 {
            return Err(invalid(format!(
                "explosive or unit-root lag polynomial: root modulus {largest:.6}"
            )));
        }
    }
    Ok(())
}

/// ADF-form AR series from zero initial values, burn-in discarded.
pub fn gen_adf_form<R: Rng + ?Sized>(
    t_len: usize,
    rho: f64,
    deltas: &[f64],
    burn_in: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_adf_form(rho, deltas)?;
    let k = deltas.len();
    // ring of the last k differences, most recent first
    let mut lags = vec![0.0; k];
    let mut y = 0.0;
    let mut out = Vec::with_capacity(t_len);
    for step in 0..t_len + burn_in {
        let e: f64 = rng.sample(StandardNormal);
        let mut dy = rho * y + e;
        for (d, l) in deltas.iter().zip(&lags) {
            dy += d * l;
        }
        if k > 0 {
            lags.rotate_right(1);
            lags[0] = dy;
        }
        y += dy;
        if step >= burn_in {
            out.push(y);
        }
    }
    Ok(out)
}

/// `y_t + θ₁ + θ₂ t` for `t = 1..=T`.
pub fn add_deterministic(y: &[f64], theta1: f64, theta2: f64) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, v)| v + theta1 + theta2 * (i + 1) as f64)
        .collect()
}

/// Euler discretisation of an Ornstein–Uhlenbeck process on `[0, 1]`:
/// `x_i = (1 + c/N) x_{i-1} + N^{-1/2} e_i`, `x₀ = 0`.
pub fn ou_path<R: Rng + ?Sized>(c: f64, n_steps: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(c <= 0.0) {
        return Err(invalid(format!("c must be non-positive, got {c}")));
    }
    if n_steps < 2 {
        return Err(invalid("an OU path needs at least two steps"));
    }
    let mut e = vec![0.0; n_steps];
    for v in e.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    Ok(ou_path_from(c, &e))
}

/// [`ou_path`] with given innovations.
pub fn ou_path_from(c: f64, innovations: &[f64]) -> Vec<f64> {
    let n = innovations.len() as f64;
    let a = 1.0 + c / n;
    let s = n.sqrt().recip();
    let mut x = 0.0;
    innovations
        .iter()
        .map(|e| {
            x = a * x + s * e;
            x
        })
        .collect()
}

/// A generator family for experiment cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum DgpFamily {
    AdfForm {
        rho_star: f64,
        #[serde(default)]
        delta_star: Vec<f64>,
    },
    ArmaNearUr {
        c: f64,
        #[serde(default)]
        phi: f64,
        #[serde(default)]
        theta: f64,
    },
}

impl DgpFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            DgpFamily::AdfForm {
                rho_star,
                delta_star,
            } => check_adf_form(*rho_star, delta_star),
            DgpFamily::ArmaNearUr { c, phi, .. } => {
                if !(*c <= 0.0) {
                    return Err(invalid(format!("c must be non-positive, got {c}")));
                }
                if !(phi.abs() < 1.0) {
                    return Err(invalid(format!("|phi| must be below one, got {phi}")));
                }
                Ok(())
            }
        }
    }

    pub fn generate<R: Rng + ?Sized>(
        &self,
        t_len: usize,
        burn_in: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        match self {
            DgpFamily::AdfForm {
                rho_star,
                delta_star,
            } => gen_adf_form(t_len, *rho_star, delta_star, burn_in, rng),
            DgpFamily::ArmaNearUr { c, phi, theta } => {
                gen_arma_near_ur(t_len, *c, *phi, *theta, burn_in, rng)
            }
        }
    }

    /// True when the family has a unit root.
    pub fn is_null(&self) -> bool {
        match self {
            DgpFamily::AdfForm { rho_star, .. } => *rho_star == 0.0,
            DgpFamily::ArmaNearUr { c, .. } => *c == 0.0,
        }
    }
}

/// Lag coefficients of the three ADF-form scenarios.
pub mod scenarios {
    pub const DELTA_A: [f64; 9] = [0.4, 0.3, 0.2, 0.0, 0.0, 0.0, -0.2, 0.0, 0.2];
    pub const DELTA_B: [f64; 3] = [-0.4, 0.0, 0.7];
    pub const DELTA_C: [f64; 1] = [0.8];
    pub const RHO_ALTERNATIVE: f64 = -0.05;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adf::{build_design, ols_fit};
    use crate::detrend::{fd_adjust, DeterministicKind};
    use crate::rng::{random_walk, substream};

    #[test]
    fn unit_root_families_are_random_walks() {
        let rw = random_walk(&mut substream(1, 0, 0), 100);
        // both generators consume one normal per step, burn-in included
        let mut a = substream(1, 0, 0);
        let arma = gen_arma_near_ur(50, 0.0, 0.0, 0.0, 50, &mut a).unwrap();
        let mut b = substream(1, 0, 0);
        let adf = gen_adf_form(50, 0.0, &[], 50, &mut b).unwrap();
        for t in 0..50 {
            assert!((arma[t] - rw[t + 50]).abs() < 1e-12);
            assert!((adf[t] - rw[t + 50]).abs() < 1e-12);
        }
    }

    #[test]
    fn argument_checks() {
        let mut r = substream(2, 0, 0);
        assert!(gen_arma_near_ur(50, 1.0, 0.0, 0.0, 50, &mut r).is_err());
        assert!(gen_arma_near_ur(50, 0.0, 1.0, 0.0, 50, &mut r).is_err());
        assert!(gen_adf_form(50, 0.1, &[], 50, &mut r).is_err());
        assert!(gen_adf_form(50, -2.0, &[], 50, &mut r).is_err());
        // Δy_t = 1.1 Δy_{t-1}: explosive differences
        let e = gen_adf_form(50, 0.0, &[1.1], 50, &mut r).unwrap_err();
        assert!(e.to_string().contains("1.1"));
        assert!(ou_path(0.5, 10, &mut r).is_err());
        assert!(ou_path(0.0, 1, &mut r).is_err());
    }

    #[test]
    fn paper_scenarios_are_admissible() {
        for d in [
            &scenarios::DELTA_A[..],
            &scenarios::DELTA_B[..],
            &scenarios::DELTA_C[..],
        ] {
            check_adf_form(0.0, d).unwrap();
            check_adf_form(scenarios::RHO_ALTERNATIVE, d).unwrap();
        }
    }

    #[test]
    fn level_roots_of_ar1() {
        // Δy = -0.3 y_{t-1}: level AR(1) with coefficient 0.7
        let m = level_ar_root_moduli(-0.3, &[]);
        assert!((m[0] - 0.7).abs() < 1e-12);
        // ρ = 0 adds a unit root to the level polynomial
        let m = level_ar_root_moduli(0.0, &[0.5]);
        assert!((m[0] - 1.0).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn arma_lag_one_autocorrelation() {
        let y = gen_arma_near_ur(100_000, 0.0, 0.8, 0.0, 50, &mut substream(3, 0, 0)).unwrap();
        let v: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let c0: f64 = v.iter().map(|x| (x - m).powi(2)).sum();
        let c1: f64 = v.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        assert!((c1 / c0 - 0.8).abs() < 0.02);
    }

    #[test]
    fn ols_recovers_adf_coefficients() {
        let deltas = scenarios::DELTA_B;
        let y = gen_adf_form(100_000, -0.05, &deltas, 50, &mut substream(4, 0, 0)).unwrap();
        let fit = ols_fit(&build_design(&y, 3).unwrap()).unwrap();
        assert!((fit.rho_hat + 0.05).abs() < 0.01);
        for (a, b) in fit.delta_hat.iter().zip(&deltas) {
            assert!((a - b).abs() < 0.01, "{a} vs {b}");
        }
    }

    #[test]
    fn unit_root_differences_have_zero_mean() {
        let t = 100_000;
        let y = gen_adf_form(t, 0.0, &scenarios::DELTA_C, 50, &mut substream(5, 0, 0)).unwrap();
        let mean_dy = (y[t - 1] - y[0]) / (t - 1) as f64;
        // long-run sd of Δy is 1/(1-0.8) = 5
        assert!(mean_dy.abs() < 4.0 * 5.0 / (t as f64).sqrt());
    }

    #[test]
    fn deterministic_terms() {
        let y = random_walk(&mut substream(6, 0, 0), 30);
        assert_eq!(add_deterministic(&y, 0.0, 0.0), y);
        let shifted = add_deterministic(&y, 5.0, 0.0);
        let a = fd_adjust(&shifted, DeterministicKind::Constant).unwrap();
        let b = fd_adjust(&y, DeterministicKind::Constant).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        let a = fd_adjust(&shifted, DeterministicKind::LinearTrend).unwrap();
        let b = fd_adjust(&y, DeterministicKind::LinearTrend).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn ou_hand_path_and_zero_c() {
        let x = ou_path_from(0.0, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(x, vec![0.5; 4]);
        let e = [0.3, -1.2, 0.8];
        let x = ou_path_from(0.0, &e);
        let s = 3f64.sqrt();
        assert!((x[2] - (0.3 - 1.2 + 0.8) / s).abs() < 1e-15);
    }

    #[test]
    fn ou_terminal_variance() {
        let reps = 10_000;
        let n = 1000;
        for c in [0.0, -30.0] {
            let ends: Vec<f64> = (0..reps)
                .map(|r| {
                    *ou_path(c, n, &mut substream(7, c.to_bits(), r))
                        .unwrap()
                        .last()
                        .unwrap()
                })
                .collect();
            let var = ends.iter().map(|v| v * v).sum::<f64>() / reps as f64;
            let a: f64 = 1.0 + c / n as f64;
            let exact = if c == 0.0 {
                1.0
            } else {
                (1.0 - a.powi(2 * n as i32)) / (n as f64 * (1.0 - a * a))
            };
            let se = exact * (2.0 / reps as f64).sqrt();
            assert!((var - exact).abs() < 4.0 * se, "c={c}: {var} vs {exact}");
            if c != 0.0 {
                let continuous = (1.0 - (2.0 * c).exp()) / (-2.0 * c);
                assert!((exact / continuous - 1.0).abs() < 0.02);
            }
        }
    }
}
