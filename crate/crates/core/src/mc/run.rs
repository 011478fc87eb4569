use rayon::prelude::*;

use super::spec::{describe_dgp, ExperimentSpec, TestId};
use super::table::{ResultRow, ResultTable};
use crate::classical::{simulate_classical_null, ClassicalOptions, ClassicalTest};
use crate::detrend::DeterministicKind;
use crate::dgp::DgpFamily;
use crate::error::{invalid, Result};
use crate::knot_tests::{
    knot_statistic, simulate_null_finite, KnotOptions, PreparedSeries, TauVariant,
};
use crate::lag_select::{resolve_lag, LagRule};
use crate::lars::{bic_tune, compute_path, PathMode};
use crate::rng::{stream_id, substream, tags, SimRng};
use crate::spacing::{spacing_with_weights, SpacingVariant};
use crate::stats::{quantile_sorted, sort_floats};
use crate::weights::{enriched_weights, j_alpha, ols_weights, PenaltyWeights};

/// Computes per-replication scores. Scores are oriented so that larger
/// values are stronger evidence against the unit root: the statistic for
/// `τ`/`τ̆`, minus the p-value for spacing tests, the activation indicator
/// for BIC, minus the statistic for the left-tailed classical tests.
/// A test that fails on a series scores NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluator {
    pub tests: Vec<TestId>,
    pub kind: DeterministicKind,
    pub lag_rule: LagRule,
    pub knot: KnotOptions,
}

impl Evaluator {
    pub fn from_spec(spec: &ExperimentSpec) -> Self {
        Self {
            tests: spec.tests.clone(),
            kind: spec.detrending,
            lag_rule: spec.lag_rule,
            knot: spec.knot,
        }
    }

    /// One lag order and one `J_α` draw per series, shared by every test.
    pub fn scores(&self, y: &[f64], aux: &mut SimRng) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.tests.len()];
        let Ok(p) = resolve_lag(y, self.kind, self.lag_rule) else {
            return out;
        };
        let k = &self.knot;
        let prep = if self.tests.iter().any(|t| t.uses_path()) {
            PreparedSeries::new(y, p, self.kind).ok()
        } else {
            None
        };
        let j = if self.tests.iter().any(|t| t.uses_j()) {
            let lag = match (k.j_lag, self.lag_rule) {
                (Some(l), _) => Some(l),
                (None, LagRule::Maic) => Some(p),
                (None, LagRule::Fixed(_)) => resolve_lag(y, self.kind, LagRule::Maic).ok(),
            };
            lag.and_then(|l| j_alpha(y, self.kind, k.j_alpha, k.j_replications, l, aux).ok())
        } else {
            None
        };
        let adaptive = prep
            .as_ref()
            .and_then(|pr| ols_weights(&pr.fit, k.gamma1, k.gamma2).ok());
        let enriched = match (&prep, j) {
            (Some(pr), Some(j)) => enriched_weights(&pr.fit, j, k.gamma1, k.gamma2).ok(),
            _ => None,
        };
        let t_len = y.len();
        for (slot, &test) in out.iter_mut().zip(&self.tests) {
            let score = match test {
                TestId::Tau => with(&prep, &adaptive, |pr, w| {
                    knot_statistic(pr, w, TauVariant::Tau, self.kind, t_len).map(|r| r.statistic)
                }),
                TestId::TauIe => with(&prep, &enriched, |pr, w| {
                    knot_statistic(pr, w, TauVariant::TauIe, self.kind, t_len).map(|r| r.statistic)
                }),
                TestId::SpacingLar => prep.as_ref().and_then(|pr| {
                    let w = PenaltyWeights::uniform(p);
                    spacing_with_weights(&pr.design, &w, pr.fit.sigma2_hat, SpacingVariant::Plain)
                        .map(|r| -r.p_value)
                        .ok()
                }),
                TestId::SpacingAlar => with(&prep, &adaptive, |pr, w| {
                    spacing_with_weights(&pr.design, w, pr.fit.sigma2_hat, SpacingVariant::Adaptive)
                        .map(|r| -r.p_value)
                }),
                TestId::SpacingAlarIe => with(&prep, &enriched, |pr, w| {
                    spacing_with_weights(&pr.design, w, pr.fit.sigma2_hat, SpacingVariant::Enriched)
                        .map(|r| -r.p_value)
                }),
                TestId::AlBic => with(&prep, &adaptive, bic_activation),
                TestId::AlieBic => with(&prep, &enriched, bic_activation),
                TestId::AdfGls => classical(ClassicalTest::AdfGls, y, self.kind, p, aux),
                TestId::MzT => classical(ClassicalTest::MzT, y, self.kind, p, aux),
                TestId::JAlpha => j.map(|j| -j),
            };
            *slot = score.unwrap_or(f64::NAN);
        }
        out
    }
}

fn with<F>(prep: &Option<PreparedSeries>, weights: &Option<PenaltyWeights>, f: F) -> Option<f64>
where
    F: FnOnce(&PreparedSeries, &PenaltyWeights) -> Result<f64>,
{
    match (prep, weights) {
        (Some(pr), Some(w)) => f(pr, w).ok(),
        _ => None,
    }
}

fn bic_activation(prep: &PreparedSeries, weights: &PenaltyWeights) -> Result<f64> {
    if weights.w1.is_infinite() {
        return Ok(0.0);
    }
    let path = compute_path(&prep.design, weights, PathMode::Lasso)?;
    let choice = bic_tune(&path, &prep.design)?;
    Ok(if choice.active.contains(&0) { 1.0 } else { 0.0 })
}

fn classical(
    test: ClassicalTest,
    y: &[f64],
    kind: DeterministicKind,
    p: usize,
    aux: &mut SimRng,
) -> Option<f64> {
    crate::classical::run_classical(
        test,
        y,
        kind,
        LagRule::Fixed(p),
        &ClassicalOptions::default(),
        aux,
    )
    .map(|r| -r.statistic)
    .ok()
}

/// Scores of every replication, one column per test.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub tests: Vec<TestId>,
    /// `columns[i][r]`: score of test `i` on replication `r`.
    pub columns: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn replications(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, test: TestId) -> Option<&[f64]> {
        self.tests
            .iter()
            .position(|t| *t == test)
            .map(|i| self.columns[i].as_slice())
    }
}

/// Streams for one `(cell, T)` pair. The null and every alternative of a
/// cell draw from the same streams, so comparisons use common random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellStreams {
    pub seed: u64,
    pub data: u64,
    pub aux: u64,
}

impl CellStreams {
    pub fn new(seed: u64, cell: usize, t_len: usize) -> Self {
        Self {
            seed,
            data: stream_id(&[tags::MC_DATA, cell as u64, t_len as u64]),
            aux: stream_id(&[tags::MC_AUX, cell as u64, t_len as u64]),
        }
    }
}

/// Generates `replications` series from `dgp` and scores them.
pub fn simulate_scores(
    eval: &Evaluator,
    dgp: &DgpFamily,
    t_len: usize,
    burn_in: usize,
    replications: usize,
    streams: CellStreams,
) -> Result<ScoreMatrix> {
    dgp.validate()?;
    let rows = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut data = substream(streams.seed, streams.data, r);
            let y = dgp.generate(t_len, burn_in, &mut data)?;
            let mut aux = substream(streams.seed, streams.aux, r);
            Ok(eval.scores(&y, &mut aux))
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let columns = (0..eval.tests.len())
        .map(|i| rows.iter().map(|row| row[i]).collect())
        .collect();
    Ok(ScoreMatrix {
        tests: eval.tests.clone(),
        columns,
    })
}

/// Rejection rule on the score scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Reject when `score > c`.
    Above(f64),
    /// Reject when `score >= c`.
    AtLeast(f64),
}

impl Threshold {
    pub fn rejects(self, score: f64) -> bool {
        match self {
            Threshold::Above(c) => score > c,
            Threshold::AtLeast(c) => score >= c,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Threshold::Above(c) | Threshold::AtLeast(c) => c,
        }
    }
}

/// Nominal level-`level` thresholds at sample size `t_len`. Knot tests use
/// the `p = 0` finite-sample null; classical tests use their own simulated
/// null under the same lag rule; spacing tests reject when `p ≤ level`;
/// BIC tests reject on activation.
pub fn nominal_thresholds(spec: &ExperimentSpec, t_len: usize) -> Result<Vec<Threshold>> {
    let kind = spec.detrending;
    let cal_seed = spec.seed ^ tags::MC_CALIBRATION;
    spec.tests
        .iter()
        .map(|&test| {
            Ok(match test {
                TestId::Tau | TestId::TauIe => {
                    let variant = if test == TestId::Tau {
                        TauVariant::Tau
                    } else {
                        TauVariant::TauIe
                    };
                    let null = simulate_null_finite(
                        variant,
                        kind,
                        t_len,
                        spec.cv_replications,
                        cal_seed,
                        &spec.knot,
                    )?;
                    Threshold::Above(quantile_sorted(&null.draws, 1.0 - spec.level))
                }
                TestId::SpacingLar | TestId::SpacingAlar | TestId::SpacingAlarIe => {
                    Threshold::AtLeast(-spec.level)
                }
                TestId::AlBic | TestId::AlieBic => Threshold::Above(0.5),
                TestId::AdfGls | TestId::MzT | TestId::JAlpha => {
                    let ct = match test {
                        TestId::AdfGls => ClassicalTest::AdfGls,
                        TestId::MzT => ClassicalTest::MzT,
                        _ => ClassicalTest::JAlpha,
                    };
                    let opts = ClassicalOptions {
                        j_alpha: spec.knot.j_alpha,
                        j_replications: spec.knot.j_replications,
                    };
                    let null = simulate_classical_null(
                        ct,
                        kind,
                        t_len,
                        spec.cv_replications,
                        cal_seed,
                        spec.lag_rule,
                        &opts,
                    )?;
                    Threshold::Above(-null.critical_value(spec.level)?)
                }
            })
        })
        .collect()
}

/// `(1 - level)` empirical quantile of the finite null scores.
pub fn size_adjusted_threshold(null_scores: &[f64], level: f64) -> Result<Threshold> {
    let mut finite: Vec<f64> = null_scores
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .collect();
    if finite.is_empty() {
        return Err(invalid("no finite null scores to calibrate against"));
    }
    sort_floats(&mut finite);
    Ok(Threshold::Above(quantile_sorted(&finite, 1.0 - level)))
}

/// Per-replication decisions; `None` where the test failed.
pub fn decisions(scores: &[f64], threshold: Threshold) -> Vec<Option<bool>> {
    scores
        .iter()
        .map(|&s| {
            if s.is_nan() {
                None
            } else {
                Some(threshold.rejects(s))
            }
        })
        .collect()
}

/// Rejection rate, its binomial standard error and the failure count.
pub fn rejection_rate(decisions: &[Option<bool>]) -> (f64, f64, usize) {
    let ok: Vec<bool> = decisions.iter().flatten().copied().collect();
    let failures = decisions.len() - ok.len();
    if ok.is_empty() {
        return (f64::NAN, f64::NAN, failures);
    }
    let n = ok.len() as f64;
    let rate = ok.iter().filter(|d| **d).count() as f64 / n;
    (rate, (rate * (1.0 - rate) / n).sqrt(), failures)
}

/// Difference of rejection rates `a - b` on paired replications and its
/// Monte Carlo standard error. Pairs where either test failed are dropped.
pub fn paired_difference(a: &[Option<bool>], b: &[Option<bool>]) -> (f64, f64) {
    let (mut n, mut only_a, mut only_b) = (0usize, 0usize, 0usize);
    for (x, y) in a.iter().zip(b) {
        if let (Some(x), Some(y)) = (x, y) {
            n += 1;
            match (x, y) {
                (true, false) => only_a += 1,
                (false, true) => only_b += 1,
                _ => {}
            }
        }
    }
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let n = n as f64;
    let (p10, p01) = (only_a as f64 / n, only_b as f64 / n);
    let diff = p10 - p01;
    (diff, ((p10 + p01 - diff * diff) / n).sqrt())
}

/// Null and alternative scores of one cell at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScores {
    pub cell: String,
    pub t_len: usize,
    pub null: ScoreMatrix,
    pub alternatives: Vec<(DgpFamily, ScoreMatrix)>,
}

/// Scores for every cell and sample size of `spec`.
pub fn simulate_experiment(spec: &ExperimentSpec) -> Result<Vec<CellScores>> {
    spec.validate()?;
    let eval = Evaluator::from_spec(spec);
    let mut out = Vec::new();
    for &t_len in &spec.sample_sizes {
        for (ci, cell) in spec.cells.iter().enumerate() {
            let streams = CellStreams::new(spec.seed, ci, t_len);
            let null = simulate_scores(
                &eval,
                &cell.null,
                t_len,
                spec.burn_in,
                spec.replications,
                streams,
            )?;
            let alternatives = cell
                .alternatives
                .iter()
                .map(|alt| {
                    simulate_scores(&eval, alt, t_len, spec.burn_in, spec.replications, streams)
                        .map(|m| (alt.clone(), m))
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(CellScores {
                cell: cell.label.clone(),
                t_len,
                null,
                alternatives,
            });
        }
    }
    Ok(out)
}

fn row(
    cell: &str,
    hypothesis: &str,
    dgp: &DgpFamily,
    t_len: usize,
    test: TestId,
    d: &[Option<bool>],
    adjusted: bool,
) -> ResultRow {
    let (rate, se, failures) = rejection_rate(d);
    ResultRow {
        cell: cell.to_string(),
        hypothesis: hypothesis.to_string(),
        dgp: describe_dgp(dgp),
        t_len,
        test,
        rejection_rate: rate,
        mc_std_error: se,
        adjusted,
        replications: d.len(),
        failures,
    }
}

/// Nominal rejection rates under each cell's null.
pub fn run_size(spec: &ExperimentSpec) -> Result<ResultTable> {
    let scores = simulate_experiment(spec)?;
    tabulate(spec, &scores, false)
}

/// Size rows followed by power rows. Power is size-adjusted against the
/// paired null run when `spec.size_adjust` is set and the test allows it.
pub fn run_power(spec: &ExperimentSpec) -> Result<ResultTable> {
    let scores = simulate_experiment(spec)?;
    tabulate(spec, &scores, true)
}

/// Builds the result table from simulated scores.
pub fn tabulate(
    spec: &ExperimentSpec,
    scores: &[CellScores],
    with_power: bool,
) -> Result<ResultTable> {
    let mut rows = Vec::new();
    for &t_len in &spec.sample_sizes {
        let nominal = nominal_thresholds(spec, t_len)?;
        for cs in scores.iter().filter(|c| c.t_len == t_len) {
            let cell = spec
                .cells
                .iter()
                .find(|c| c.label == cs.cell)
                .ok_or_else(|| invalid(format!("unknown cell '{}'", cs.cell)))?;
            for (i, &test) in spec.tests.iter().enumerate() {
                let d = decisions(&cs.null.columns[i], nominal[i]);
                rows.push(row(&cs.cell, "null", &cell.null, t_len, test, &d, false));
            }
            if !with_power {
                continue;
            }
            for (alt, m) in &cs.alternatives {
                for (i, &test) in spec.tests.iter().enumerate() {
                    let adjusted = spec.size_adjust && test.size_adjustable();
                    let threshold = if adjusted {
                        size_adjusted_threshold(&cs.null.columns[i], spec.level)?
                    } else {
                        nominal[i]
                    };
                    let d = decisions(&m.columns[i], threshold);
                    rows.push(row(&cs.cell, "alternative", alt, t_len, test, &d, adjusted));
                }
            }
        }
    }
    Ok(ResultTable { rows })
}

/// Local power against `c` in `cs` for the ARMA near-unit-root family with
/// the given error parameters, on the tests, sample sizes and settings of
/// `base`. Cells of `base` are ignored.
pub fn local_power_curve(
    base: &ExperimentSpec,
    phi: f64,
    theta: f64,
    cs: &[f64],
) -> Result<ResultTable> {
    if cs.is_empty() {
        return Err(invalid("at least one value of c is required"));
    }
    let mut spec = base.clone();
    spec.cells = vec![super::spec::CellSpec {
        label: "local_power".into(),
        null: DgpFamily::ArmaNearUr { c: 0.0, phi, theta },
        alternatives: cs
            .iter()
            .map(|&c| DgpFamily::ArmaNearUr { c, phi, theta })
            .collect(),
    }];
    run_power(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::spec::CellSpec;

    fn small_spec(tests: Vec<TestId>) -> ExperimentSpec {
        ExperimentSpec {
            name: "unit".into(),
            seed: 11,
            replications: 100,
            level: 0.05,
            size_adjust: true,
            sample_sizes: vec![60],
            tests,
            detrending: DeterministicKind::Constant,
            lag_rule: LagRule::Fixed(1),
            burn_in: 20,
            cv_replications: 200,
            knot: KnotOptions {
                j_replications: 40,
                ..KnotOptions::default()
            },
            cells: vec![CellSpec {
                label: "ar".into(),
                null: DgpFamily::ArmaNearUr {
                    c: 0.0,
                    phi: 0.0,
                    theta: 0.0,
                },
                alternatives: vec![DgpFamily::ArmaNearUr {
                    c: -30.0,
                    phi: 0.0,
                    theta: 0.0,
                }],
            }],
        }
    }

    #[test]
    fn paired_difference_hand_example() {
        let a = [Some(true), Some(true), Some(false), Some(true), None];
        let b = [Some(false), Some(true), Some(true), Some(false), Some(true)];
        let (d, se) = paired_difference(&a, &b);
        // n = 4, p10 = 2/4, p01 = 1/4.
        assert!((d - 0.25).abs() < 1e-15);
        let expect = ((0.75 - 0.0625) / 4.0f64).sqrt();
        assert!((se - expect).abs() < 1e-15);
    }

    #[test]
    fn rates_skip_failures() {
        let d = [Some(true), None, Some(false), Some(false)];
        let (r, se, f) = rejection_rate(&d);
        assert_eq!(f, 1);
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        assert!((se - (2.0f64 / 27.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn threshold_conventions() {
        assert!(Threshold::AtLeast(-0.05).rejects(-0.05));
        assert!(!Threshold::Above(0.5).rejects(0.5));
        let t = size_adjusted_threshold(&[f64::NAN, 1.0, 2.0, 3.0, 4.0, 5.0], 0.25).unwrap();
        assert_eq!(t, Threshold::Above(4.0));
    }

    #[test]
    fn scores_have_expected_signs() {
        let spec = small_spec(TestId::ALL.to_vec());
        let eval = Evaluator::from_spec(&spec);
        let m = simulate_scores(
            &eval,
            &spec.cells[0].null,
            60,
            20,
            20,
            CellStreams::new(1, 0, 60),
        )
        .unwrap();
        for (test, col) in m.tests.iter().zip(&m.columns) {
            for &s in col {
                assert!(s.is_finite(), "{test} failed");
                match test {
                    TestId::Tau | TestId::TauIe => assert!(s >= 0.0),
                    TestId::SpacingLar | TestId::SpacingAlar | TestId::SpacingAlarIe => {
                        assert!((-1.0..=0.0).contains(&s))
                    }
                    TestId::AlBic | TestId::AlieBic => assert!(s == 0.0 || s == 1.0),
                    TestId::JAlpha => assert!(s < 0.0),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn scores_match_direct_calls() {
        let spec = small_spec(vec![TestId::Tau, TestId::TauIe, TestId::AdfGls]);
        let eval = Evaluator::from_spec(&spec);
        let y = crate::rng::random_walk(&mut substream(3, 0, 0), 80);
        let mut aux = substream(3, 1, 0);
        let s = eval.scores(&y, &mut aux);
        let (tau, tau_ie) = crate::knot_tests::tau_pair(
            &y,
            1,
            spec.detrending,
            &spec.knot,
            &mut substream(3, 1, 0),
        )
        .unwrap();
        let adf = crate::classical::adf_gls(&y, spec.detrending, LagRule::Fixed(1)).unwrap();
        assert_eq!(s[0], tau.statistic);
        assert_eq!(s[1], tau_ie.statistic);
        assert_eq!(s[2], -adf.statistic);
    }

    #[test]
    fn common_random_numbers_are_shared() {
        let spec = small_spec(vec![TestId::Tau]);
        let eval = Evaluator::from_spec(&spec);
        let streams = CellStreams::new(5, 0, 60);
        let same = DgpFamily::ArmaNearUr {
            c: 0.0,
            phi: 0.0,
            theta: 0.0,
        };
        let a = simulate_scores(&eval, &same, 60, 20, 30, streams).unwrap();
        let b = simulate_scores(&eval, &same, 60, 20, 30, streams).unwrap();
        assert_eq!(a, b);
        let other = simulate_scores(&eval, &same, 60, 20, 30, CellStreams::new(5, 1, 60)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn power_table_layout_and_strong_alternative() {
        let spec = small_spec(vec![TestId::Tau, TestId::SpacingLar, TestId::AdfGls]);
        let table = run_power(&spec).unwrap();
        assert_eq!(table.rows.len(), 6);
        let alt: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.hypothesis == "alternative")
            .collect();
        assert!(alt[0].adjusted && !alt[1].adjusted && alt[2].adjusted);
        // c = -30 at T = 60 is far from the unit root.
        assert!(alt[0].rejection_rate > 0.5, "{}", alt[0].rejection_rate);
        assert!(alt[2].rejection_rate > 0.5, "{}", alt[2].rejection_rate);
        let size = run_size(&spec).unwrap();
        assert_eq!(size.rows.len(), 3);
        assert_eq!(size.rows, table.rows[..3].to_vec());
    }

    #[test]
    fn local_power_increases_with_distance() {
        let spec = small_spec(vec![TestId::Tau]);
        let t = local_power_curve(&spec, 0.0, 0.0, &[-2.0, -40.0]).unwrap();
        let alt: Vec<_> = t
            .rows
            .iter()
            .filter(|r| r.hypothesis == "alternative")
            .collect();
        assert_eq!(alt.len(), 2);
        assert!(alt[1].rejection_rate > alt[0].rejection_rate);
    }
}
