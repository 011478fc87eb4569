//! LARS solution paths for the weighted Lasso
//! `Σ (y - Xβ)² + 2λ Σ_j w_j^{γ_j} |β_j|`.
//!
//! The path is traced on scaled columns `x̃_j = w_j^{-γ_j} x_j` and reported
//! in original units. With the factor 2 on the penalty, stationarity reads
//! `x̃_j' r = λ sgn(β_j)`, so a knot is a raw absolute correlation `|x̃_j' r|`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::adf::AdfDesign;
use crate::error::{invalid, Error, Result};
use crate::linalg::least_squares;
use crate::weights::PenaltyWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    Lar,
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Activate,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEvent {
    pub var: usize,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub lambda: f64,
    /// Coefficients at this knot, original units.
    pub beta: Vec<f64>,
    pub events: Vec<PathEvent>,
    /// Active variables and signs on the segment below this knot.
    pub active: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPath {
    pub mode: PathMode,
    /// Strictly decreasing positive `λ`.
    pub knots: Vec<Knot>,
    /// Coefficients at `λ = 0`.
    pub end_beta: Vec<f64>,
    /// Column multipliers `w^{-γ}`; zero marks an excluded column.
    pub scales: Vec<f64>,
}

/// One linear piece `β(λ) = β_hi + (λ_hi - λ) · slope` for `λ ∈ [λ_lo, λ_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lambda_hi: f64,
    pub lambda_lo: f64,
    pub beta_hi: Vec<f64>,
    pub slope: Vec<f64>,
}

impl SolutionPath {
    pub fn n_vars(&self) -> usize {
        self.scales.len()
    }

    pub fn knot_values(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.lambda).collect()
    }

    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(self.knots.len());
        for (i, k) in self.knots.iter().enumerate() {
            let (lo, beta_lo) = match self.knots.get(i + 1) {
                Some(next) => (next.lambda, &next.beta),
                None => (0.0, &self.end_beta),
            };
            let width = k.lambda - lo;
            let slope = k
                .beta
                .iter()
                .zip(beta_lo)
                .map(|(a, b)| if width > 0.0 { (b - a) / width } else { 0.0 })
                .collect();
            out.push(Segment {
                lambda_hi: k.lambda,
                lambda_lo: lo,
                beta_hi: k.beta.clone(),
                slope,
            });
        }
        out
    }

    pub fn coefficients_at(&self, lambda: f64) -> Result<Vec<f64>> {
        if !(lambda >= 0.0) {
            return Err(invalid(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        let Some(first) = self.knots.first() else {
            return Ok(vec![0.0; self.n_vars()]);
        };
        if lambda >= first.lambda {
            return Ok(vec![0.0; self.n_vars()]);
        }
        // last knot with λ_k > lambda
        let i = self.knots.partition_point(|k| k.lambda > lambda) - 1;
        let hi = &self.knots[i];
        let (lo_lambda, lo_beta) = match self.knots.get(i + 1) {
            Some(k) => (k.lambda, &k.beta),
            None => (0.0, &self.end_beta),
        };
        let frac = (hi.lambda - lambda) / (hi.lambda - lo_lambda);
        Ok(hi
            .beta
            .iter()
            .zip(lo_beta)
            .map(|(a, b)| a + frac * (b - a))
            .collect())
    }

    /// Largest knot at which `var` leaves zero with a non-vanishing slope.
    pub fn activation_knot(&self, var: usize) -> Option<f64> {
        let segments = self.segments();
        for (i, k) in self.knots.iter().enumerate() {
            let activates = k
                .events
                .iter()
                .any(|e| e.var == var && e.kind == EventKind::Activate);
            if !activates {
                continue;
            }
            let seg = &segments[i];
            let sup = seg.slope.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            if seg.slope[var].abs() > 1e-12 * sup {
                return Some(k.lambda);
            }
        }
        None
    }

    /// Signed active set on the open segment containing `lambda`.
    pub fn active_set_at(&self, lambda: f64) -> Vec<(usize, f64)> {
        let i = self.knots.partition_point(|k| k.lambda > lambda);
        if i == 0 {
            Vec::new()
        } else {
            self.knots[i - 1].active.clone()
        }
    }

    /// Index of the knot where `var` first activates.
    pub fn activation_step(&self, var: usize) -> Option<usize> {
        let knot = self.activation_knot(var)?;
        self.knots.iter().position(|k| k.lambda == knot)
    }
}

fn scaled_columns(x: &DMatrix<f64>, scales: &[f64]) -> (DMatrix<f64>, Vec<usize>) {
    let kept: Vec<usize> = (0..x.ncols()).filter(|&j| scales[j] > 0.0).collect();
    let xs = DMatrix::from_fn(x.nrows(), kept.len(), |i, c| {
        x[(i, kept[c])] * scales[kept[c]]
    });
    (xs, kept)
}

/// LARS on `x` with column multipliers `scales` (`w^{-γ}`, zero to exclude).
pub fn lars_path(
    x: &DMatrix<f64>,
    y: &[f64],
    scales: &[f64],
    mode: PathMode,
) -> Result<SolutionPath> {
    let (n, m_all) = x.shape();
    if y.len() != n {
        return Err(invalid(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if scales.len() != m_all {
        return Err(invalid("one scale per column is required"));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(invalid("column scales must be finite and non-negative"));
    }
    let (xs, kept) = scaled_columns(x, scales);
    let m = kept.len();
    let yv = DVector::from_column_slice(y);
    if m > 0 && m <= n {
        if let Err(Error::Singular(msg)) = least_squares(&xs, &yv) {
            return Err(Error::Numeric(format!(
                "weighted design is rank deficient: {msg}"
            )));
        }
    }
    let to_original = |bt: &DVector<f64>| -> Vec<f64> {
        let mut b = vec![0.0; m_all];
        for (c, &j) in kept.iter().enumerate() {
            b[j] = bt[c] * scales[j];
        }
        b
    };

    let mut path = SolutionPath {
        mode,
        knots: Vec::new(),
        end_beta: vec![0.0; m_all],
        scales: scales.to_vec(),
    };
    if m == 0 {
        return Ok(path);
    }

    let mut beta = DVector::<f64>::zeros(m);
    let mut corr = xs.tr_mul(&yv);
    let lambda0 = corr.amax();
    if !(lambda0 > 0.0) {
        return Ok(path);
    }
    let tiny = 1e-13 * lambda0;
    let mut lambda = lambda0;
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut pending: Vec<PathEvent> = Vec::new();
    let mut just_dropped: Option<usize> = None;

    // first entry
    let first = pick_entry(
        (0..m)
            .filter(|j| corr[*j].abs() >= lambda0 - tiny)
            .collect(),
        &kept,
        lambda,
    );
    active.push(first);
    signs.push(corr[first].signum());
    pending.push(PathEvent {
        var: kept[first],
        kind: EventKind::Activate,
    });

    let max_active = m.min(n);
    loop {
        let xa = DMatrix::from_fn(n, active.len(), |i, c| xs[(i, active[c])]);
        let gram = xa.tr_mul(&xa);
        let chol = Cholesky::new(gram).ok_or_else(|| {
            Error::Numeric("active columns are linearly dependent; the path is not unique".into())
        })?;
        let d = chol.solve(&DVector::from_column_slice(&signs));
        let u = &xa * &d;
        let a = xs.tr_mul(&u);

        // step lengths in units of λ decrease
        let mut step = lambda;
        let mut entries: Vec<usize> = Vec::new();
        let mut drop: Option<usize> = None;
        if active.len() < max_active {
            for j in 0..m {
                if active.contains(&j) {
                    continue;
                }
                // a dropped variable sits on the boundary; only a later crossing counts
                let floor = if Some(j) == just_dropped {
                    1e-9 * lambda0
                } else {
                    -1.0
                };
                for (num, den) in [
                    (lambda - corr[j], 1.0 - a[j]),
                    (lambda + corr[j], 1.0 + a[j]),
                ] {
                    if den <= 1e-12 || num < -1e-10 * lambda0 {
                        continue;
                    }
                    let g = num.max(0.0) / den;
                    if g <= floor {
                        continue;
                    }
                    if g < step - tiny {
                        step = g;
                        entries.clear();
                        entries.push(j);
                    } else if (g - step).abs() <= tiny && !entries.contains(&j) {
                        entries.push(j);
                    }
                }
            }
        }
        if mode == PathMode::Lasso {
            for (c, &j) in active.iter().enumerate() {
                if d[c] == 0.0 || beta[j] == 0.0 {
                    continue;
                }
                let g = -beta[j] / d[c];
                if g > tiny && g < step - tiny {
                    step = g;
                    entries.clear();
                    drop = Some(c);
                }
            }
        }
        let step = step.min(lambda);

        // close the knot at the current λ if this step moves
        if step > tiny || lambda - step <= 0.0 {
            if !pending.is_empty() {
                path.knots.push(Knot {
                    lambda,
                    beta: to_original(&beta),
                    events: std::mem::take(&mut pending),
                    active: active
                        .iter()
                        .zip(&signs)
                        .map(|(&c, &s)| (kept[c], s))
                        .collect(),
                });
            }
        }

        for (c, &j) in active.iter().enumerate() {
            beta[j] += step * d[c];
        }
        lambda -= step;
        if lambda <= tiny {
            break;
        }
        corr = xs.tr_mul(&(&yv - &xs * &beta));
        just_dropped = None;

        if let Some(c) = drop {
            let j = active.remove(c);
            signs.remove(c);
            beta[j] = 0.0;
            just_dropped = Some(j);
            pending.push(PathEvent {
                var: kept[j],
                kind: EventKind::Drop,
            });
            if active.is_empty() {
                return Err(Error::Numeric("active set emptied before λ = 0".into()));
            }
        } else if !entries.is_empty() {
            let j = pick_entry(entries, &kept, lambda);
            active.push(j);
            signs.push(corr[j].signum());
            pending.push(PathEvent {
                var: kept[j],
                kind: EventKind::Activate,
            });
        } else {
            break;
        }
    }
    // a pending event at a step of zero length still needs a knot record
    if !pending.is_empty() && lambda > tiny {
        path.knots.push(Knot {
            lambda,
            beta: to_original(&beta),
            events: pending,
            active: active
                .iter()
                .zip(&signs)
                .map(|(&c, &s)| (kept[c], s))
                .collect(),
        });
    }
    // finish exactly on the least-squares fit of the final active set
    path.end_beta = to_original(&beta);
    Ok(path)
}

fn pick_entry(mut tied: Vec<usize>, kept: &[usize], lambda: f64) -> usize {
    tied.sort_unstable();
    if tied.len() > 1 {
        let vars: Vec<usize> = tied.iter().map(|&c| kept[c]).collect();
        log::warn!(
            "simultaneous activation of {vars:?} at λ = {lambda}; taking the smallest index"
        );
    }
    tied[0]
}

/// Path of the ADF regression under the given penalty weights.
pub fn compute_path(
    design: &AdfDesign,
    weights: &PenaltyWeights,
    mode: PathMode,
) -> Result<SolutionPath> {
    if weights.len() != design.p + 1 {
        return Err(invalid(format!(
            "{} weights for {} regressors",
            weights.len(),
            design.p + 1
        )));
    }
    let scales = weights.column_scales();
    if scales.iter().all(|s| *s == 0.0) {
        return Err(invalid("every penalty weight is infinite"));
    }
    lars_path(&design.regressors(), &design.response, &scales, mode)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicChoice {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub active: Vec<usize>,
    pub bic: f64,
}

/// `n log(RSS/n) + |A| log n` over every knot and `λ = 0`; ties go to the
/// larger `λ`.
pub fn bic_tune_xy(path: &SolutionPath, x: &DMatrix<f64>, y: &[f64]) -> Result<BicChoice> {
    let n = y.len();
    let nf = n as f64;
    let yv = DVector::from_column_slice(y);
    let tss = yv.norm_squared();
    let candidates = path
        .knots
        .iter()
        .map(|k| (k.lambda, k.beta.clone()))
        .chain(std::iter::once((0.0, path.end_beta.clone())));
    let mut best: Option<BicChoice> = None;
    for (lambda, beta) in candidates {
        let rss = (&yv - x * DVector::from_column_slice(&beta)).norm_squared();
        if !(rss > 1e-24 * tss) {
            return Err(Error::Degenerate(
                "zero residual sum of squares on the path".into(),
            ));
        }
        let active: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
        let bic = nf * (rss / nf).ln() + active.len() as f64 * nf.ln();
        if best.as_ref().is_none_or(|b| bic < b.bic) {
            best = Some(BicChoice {
                lambda,
                beta,
                active,
                bic,
            });
        }
    }
    best.ok_or_else(|| invalid("empty path"))
}

pub fn bic_tune(path: &SolutionPath, design: &AdfDesign) -> Result<BicChoice> {
    bic_tune_xy(path, &design.regressors(), &design.response)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adf::build_design;
    use crate::rng::{fill_normal, random_walk, substream};
    use crate::testutil::{lasso_cd, rss_oracle};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_instance(seed: u64, n: usize, m: usize) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = substream(seed, 77, 0);
        let mut buf = vec![0.0; n * m + n];
        fill_normal(&mut rng, &mut buf);
        let x = DMatrix::from_column_slice(n, m, &buf[..n * m]);
        let beta: Vec<f64> = (0..m).map(|j| if j % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| (0..m).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + buf[n * m + i])
            .collect();
        let scales: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..2.0)).collect();
        (x, y, scales)
    }

    fn kkt_violation(
        x: &DMatrix<f64>,
        y: &[f64],
        scales: &[f64],
        beta: &[f64],
        lambda: f64,
    ) -> f64 {
        let r = DVector::from_column_slice(y) - x * DVector::from_column_slice(beta);
        let mut worst: f64 = 0.0;
        for j in 0..x.ncols() {
            if scales[j] == 0.0 {
                continue;
            }
            let c = scales[j] * x.column(j).dot(&r);
            let v = if beta[j] != 0.0 {
                (c - lambda * beta[j].signum()).abs()
            } else {
                (c.abs() - lambda).max(0.0)
            };
            worst = worst.max(v / lambda);
        }
        worst
    }

    #[test]
    fn single_regressor_path() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, -1.0, 0.5]);
        let y = [2.0, 3.0, -1.0, 1.0];
        let path = lars_path(&x, &y, &[1.0], PathMode::Lasso).unwrap();
        let xty = 2.0 + 6.0 + 1.0 + 0.5;
        assert_eq!(path.knots.len(), 1);
        assert!((path.knots[0].lambda - xty).abs() < 1e-12);
        let ols = xty / (1.0 + 4.0 + 1.0 + 0.25);
        assert!((path.end_beta[0] - ols).abs() < 1e-12);
        let mid = path.coefficients_at(xty / 2.0).unwrap();
        assert!((mid[0] - ols / 2.0).abs() < 1e-12);
        assert_eq!(path.coefficients_at(xty * 1.5).unwrap(), vec![0.0]);
        assert!(path.coefficients_at(-1.0).is_err());
    }

    #[test]
    fn orthonormal_design_soft_thresholds() {
        // orthonormal columns scaled by the inverse weights
        let x = DMatrix::from_row_slice(
            4,
            3,
            &[
                0.5, 0.5, 0.5, //
                0.5, -0.5, 0.5, //
                0.5, 0.5, -0.5, //
                0.5, -0.5, -0.5,
            ],
        );
        let y = [3.0, -1.0, 2.0, 0.5];
        let scales = [1.0, 0.5, 2.0];
        let z: Vec<f64> = (0..3)
            .map(|j| (0..4).map(|i| x[(i, j)] * y[i]).sum::<f64>())
            .collect();
        for mode in [PathMode::Lar, PathMode::Lasso] {
            let path = lars_path(&x, &y, &scales, mode).unwrap();
            let mut expect: Vec<f64> = (0..3).map(|j| (scales[j] * z[j]).abs()).collect();
            expect.sort_by(|a, b| b.total_cmp(a));
            let got = path.knot_values();
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-12, "{got:?} vs {expect:?}");
            }
            for lambda in [0.1, 0.7, 1.3, 2.2] {
                let b = path.coefficients_at(lambda).unwrap();
                for j in 0..3 {
                    // β̃ = soft(x̃'y, λ) / s², β = s β̃
                    let zt = scales[j] * z[j];
                    let soft = zt.signum() * (zt.abs() - lambda).max(0.0);
                    let want = soft / scales[j];
                    assert!((b[j] - want).abs() < 1e-12, "{mode:?} λ={lambda} j={j}");
                }
            }
        }
    }

    #[test]
    fn random_instance_matches_coordinate_descent() {
        let (x, y, scales) = random_instance(5, 40, 6);
        let path = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
        let lambda_max = path.knots[0].lambda;
        let pens: Vec<f64> = scales.iter().map(|s| 1.0 / s).collect();
        for i in 1..=20 {
            let lambda = lambda_max * i as f64 / 21.0;
            let ours = path.coefficients_at(lambda).unwrap();
            let cd = lasso_cd(&x, &y, &pens, lambda, 1e-13);
            let sup = ours
                .iter()
                .zip(&cd)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(sup < 1e-6, "λ={lambda}: {sup}");
        }
    }

    #[test]
    fn lambda_zero_is_least_squares() {
        let (x, y, scales) = random_instance(6, 30, 5);
        let path = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
        let (ols, _) = rss_oracle(&x, &y);
        for (a, b) in path.coefficients_at(0.0).unwrap().iter().zip(&ols) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn excluded_columns_never_activate() {
        let (x, y, mut scales) = random_instance(7, 30, 4);
        scales[1] = 0.0;
        let path = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
        assert_eq!(path.activation_knot(1), None);
        assert!(path.knots.iter().all(|k| k.beta[1] == 0.0));
        assert_eq!(path.end_beta[1], 0.0);
    }

    #[test]
    fn knots_strictly_decrease_and_start_at_zero() {
        for seed in 0..20 {
            let (x, y, scales) = random_instance(seed, 25, 8);
            let path = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
            assert!(path.knots[0].beta.iter().all(|b| *b == 0.0));
            assert!(path.knots.windows(2).all(|w| w[0].lambda > w[1].lambda));
            assert!(path.knots.last().unwrap().lambda > 0.0);
            let drops = path
                .knots
                .iter()
                .flat_map(|k| &k.events)
                .filter(|e| e.kind == EventKind::Drop)
                .count();
            if drops == 0 {
                assert!(path.knots.len() >= 8);
            }
        }
    }

    #[test]
    fn continuity_at_knots() {
        let (x, y, scales) = random_instance(8, 35, 6);
        let path = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
        for k in &path.knots {
            let eps = 1e-9 * k.lambda;
            let above = path.coefficients_at(k.lambda + eps).unwrap();
            let below = path.coefficients_at(k.lambda - eps).unwrap();
            let at = path.coefficients_at(k.lambda).unwrap();
            for j in 0..6 {
                assert!((above[j] - at[j]).abs() < 1e-6);
                assert!((below[j] - at[j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn p0_knot_closed_form() {
        let y = random_walk(&mut substream(12, 0, 0), 80);
        let d = build_design(&y, 0).unwrap();
        let w = PenaltyWeights::new(2.5, vec![], 1.0, 1.0).unwrap();
        let path = compute_path(&d, &w, PathMode::Lasso).unwrap();
        let s: f64 = d.level.iter().zip(&d.response).map(|(a, b)| a * b).sum();
        let knot = path.activation_knot(0).unwrap();
        assert!((knot - s.abs() / 2.5).abs() <= 1e-12 * knot);
    }

    #[test]
    fn drop_then_reactivate_reports_first_entry() {
        // search random designs for a drop followed by a re-entry
        let mut found = false;
        for seed in 0..400 {
            let (x, y, scales) = random_instance(seed + 1000, 12, 8);
            let Ok(path) = lars_path(&x, &y, &scales, PathMode::Lasso) else {
                continue;
            };
            for var in 0..8 {
                let entries: Vec<f64> = path
                    .knots
                    .iter()
                    .filter(|k| {
                        k.events
                            .iter()
                            .any(|e| e.var == var && e.kind == EventKind::Activate)
                    })
                    .map(|k| k.lambda)
                    .collect();
                if entries.len() >= 2 {
                    found = true;
                    assert_eq!(path.activation_knot(var), Some(entries[0]));
                }
            }
        }
        assert!(found, "no re-entry path found among the random designs");
    }

    #[test]
    fn tied_entries_share_a_knot_in_index_order() {
        let x = DMatrix::from_row_slice(
            4,
            3,
            &[
                0.5, 0.5, 0.5, //
                0.5, -0.5, 0.5, //
                0.5, 0.5, -0.5, //
                0.5, -0.5, -0.5,
            ],
        );
        // x1'y = x2'y = 2, x3'y = 1
        let y = [2.5, 0.5, 1.5, -0.5];
        let path = lars_path(&x, &y, &[1.0, 1.0, 1.0], PathMode::Lasso).unwrap();
        assert_eq!(path.knots.len(), 2);
        let vars: Vec<usize> = path.knots[0].events.iter().map(|e| e.var).collect();
        assert_eq!(vars, vec![0, 1]);
        assert_eq!(path.activation_knot(0), path.activation_knot(1));
    }

    #[test]
    fn bic_on_one_knot_path_compares_empty_and_full() {
        let x = DMatrix::from_column_slice(5, 1, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let strong = [1.1, 2.0, 2.9, 4.2, 5.0];
        let path = lars_path(&x, &strong, &[1.0], PathMode::Lasso).unwrap();
        let c = bic_tune_xy(&path, &x, &strong).unwrap();
        assert_eq!(c.active, vec![0]);
        assert_eq!(c.lambda, 0.0);
        let noise = [0.3, -0.2, 0.1, -0.4, 0.15];
        let path = lars_path(&x, &noise, &[1.0], PathMode::Lasso).unwrap();
        let c = bic_tune_xy(&path, &x, &noise).unwrap();
        assert!(c.active.is_empty());
    }

    #[test]
    fn bic_matches_brute_force_over_knots() {
        for seed in 0..10 {
            let (x, y, scales) = random_instance(seed + 50, 40, 5);
            let path = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
            let choice = bic_tune_xy(&path, &x, &y).unwrap();
            let n = 40.0f64;
            let mut best = f64::INFINITY;
            for lambda in path.knot_values().into_iter().chain([0.0]) {
                let b = path.coefficients_at(lambda).unwrap();
                let r = DVector::from_column_slice(&y) - &x * DVector::from_column_slice(&b);
                let df = b.iter().filter(|v| **v != 0.0).count() as f64;
                best = best.min(n * (r.norm_squared() / n).ln() + df * n.ln());
            }
            assert!((choice.bic - best).abs() < 1e-9);
        }
    }

    #[test]
    fn bic_rejects_exact_fit() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = [2.0, 4.0, 6.0];
        let path = lars_path(&x, &y, &[1.0], PathMode::Lasso).unwrap();
        assert!(matches!(
            bic_tune_xy(&path, &x, &y),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn dependent_columns_are_a_numeric_error() {
        let x = DMatrix::from_column_slice(4, 2, &[1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.0]);
        let y = [1.0, 2.5, 2.9, 4.4];
        assert!(matches!(
            lars_path(&x, &y, &[1.0, 1.0], PathMode::Lar),
            Err(Error::Numeric(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kkt_holds_inside_segments(seed in 0u64..10_000, n in 12usize..50, m in 1usize..9) {
            prop_assume!(n > m + 1);
            let (x, y, scales) = random_instance(seed, n, m);
            let path = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
            let top = path.knots[0].lambda;
            let mut rng = substream(seed, 1, 0);
            for _ in 0..50 {
                let lambda = rng.random_range(1e-3 * top..top);
                let b = path.coefficients_at(lambda).unwrap();
                prop_assert!(kkt_violation(&x, &y, &scales, &b, lambda) < 1e-8);
            }
        }

        #[test]
        fn path_is_equivariant_to_response_scaling(seed in 0u64..10_000, a in 0.05f64..20.0) {
            let (x, y, scales) = random_instance(seed, 30, 5);
            let ay: Vec<f64> = y.iter().map(|v| a * v).collect();
            let p1 = lars_path(&x, &y, &scales, PathMode::Lasso).unwrap();
            let p2 = lars_path(&x, &ay, &scales, PathMode::Lasso).unwrap();
            prop_assert_eq!(p1.knots.len(), p2.knots.len());
            for (k1, k2) in p1.knots.iter().zip(&p2.knots) {
                prop_assert!((k2.lambda - a * k1.lambda).abs() <= 1e-9 * k2.lambda);
                prop_assert_eq!(&k1.events, &k2.events);
            }
            let lambda = 0.4 * p1.knots[0].lambda;
            let b1 = p1.coefficients_at(lambda).unwrap();
            let b2 = p2.coefficients_at(a * lambda).unwrap();
            for (u, v) in b1.iter().zip(&b2) {
                prop_assert!((v - a * u).abs() <= 1e-9 * (1.0 + (a * u).abs()));
            }
        }
    }
}
