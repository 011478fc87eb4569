//! Benchmark unit root tests: ADF-GLS, `MZ_t` and the `J_α` range test,
//! each with a simulated random-walk null.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adf::{build_design, ols_fit};
use crate::detrend::DeterministicKind;
use crate::error::{invalid, Error, Result};
use crate::lag_select::{ar_lrv, gls_or_raw, resolve_lag, LagRule};
use crate::rng::{random_walk, stream_id, substream, tags};
use crate::stats::{quantile_sorted, sort_floats};
use crate::weights::{j_alpha, J_ALPHA_DEFAULT, J_REPLICATIONS_DEFAULT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalTest {
    AdfGls,
    MzT,
    JAlpha,
}

impl ClassicalTest {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassicalTest::AdfGls => "adf_gls",
            ClassicalTest::MzT => "mz_t",
            ClassicalTest::JAlpha => "j_alpha",
        }
    }

    /// All three reject for small values.
    pub fn tail(self) -> Tail {
        Tail::Left
    }
}

impl std::fmt::Display for ClassicalTest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicalOptions {
    pub j_alpha: f64,
    pub j_replications: usize,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        Self {
            j_alpha: J_ALPHA_DEFAULT,
            j_replications: J_REPLICATIONS_DEFAULT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTestResult {
    pub test: ClassicalTest,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub tail: Tail,
    pub lag: usize,
    pub lrv: f64,
}

impl ClassicalTestResult {
    pub fn with_null(mut self, null: &ClassicalNull) -> Self {
        self.p_value = Some(null.p_value(self.statistic));
        self
    }
}

fn check_length(t_len: usize, k: usize) -> Result<()> {
    if t_len < k + 10 {
        return Err(Error::InvalidLength {
            needed: k + 10,
            got: t_len,
        });
    }
    Ok(())
}

/// t-ratio of `ξ₀` in `Δy^d_t = ξ₀ y^d_{t-1} + Σ ξ_j Δy^d_{t-j} + e_t` on
/// GLS-adjusted data.
pub fn adf_gls(y: &[f64], kind: DeterministicKind, rule: LagRule) -> Result<ClassicalTestResult> {
    let k = resolve_lag(y, kind, rule)?;
    check_length(y.len(), k)?;
    let y_d = gls_or_raw(y, kind)?;
    let fit = ols_fit(&build_design(&y_d, k)?)?;
    let lrv = ar_lrv(&y_d, k)?;
    Ok(ClassicalTestResult {
        test: ClassicalTest::AdfGls,
        statistic: fit.t_ratios[0],
        p_value: None,
        tail: Tail::Left,
        lag: k,
        lrv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzStatistics {
    pub mz_alpha: f64,
    pub msb: f64,
    pub mz_t: f64,
}

/// `MZ_α`, `MSB` and `MZ_t = MZ_α · MSB` from adjusted data and an LRV
/// estimate, with `y^d_0 = 0` in the lagged sum of squares.
pub fn mz_statistics(y_d: &[f64], lrv: f64) -> MzStatistics {
    let t = y_d.len() as f64;
    let last = y_d[y_d.len() - 1];
    let lagged_ss: f64 = y_d[..y_d.len() - 1].iter().map(|v| v * v).sum();
    let mz_alpha = (last * last / t - lrv) / (2.0 * lagged_ss / (t * t));
    let msb = (lagged_ss / (t * t) / lrv).sqrt();
    MzStatistics {
        mz_alpha,
        msb,
        mz_t: mz_alpha * msb,
    }
}

pub fn mz_t(y: &[f64], kind: DeterministicKind, rule: LagRule) -> Result<ClassicalTestResult> {
    let k = resolve_lag(y, kind, rule)?;
    check_length(y.len(), k)?;
    let y_d = gls_or_raw(y, kind)?;
    let lrv = ar_lrv(&y_d, k)?;
    let stats = mz_statistics(&y_d, lrv);
    if !stats.mz_t.is_finite() {
        return Err(Error::Degenerate("MZ_t is not finite".into()));
    }
    Ok(ClassicalTestResult {
        test: ClassicalTest::MzT,
        statistic: stats.mz_t,
        p_value: None,
        tail: Tail::Left,
        lag: k,
        lrv,
    })
}

/// `J_α` as a test statistic; small values indicate stationarity.
pub fn j_alpha_test<R: Rng + ?Sized>(
    y: &[f64],
    kind: DeterministicKind,
    opts: &ClassicalOptions,
    rule: LagRule,
    rng: &mut R,
) -> Result<ClassicalTestResult> {
    let k = resolve_lag(y, kind, rule)?;
    let adjusted = crate::detrend::ols_adjust(y, kind)?;
    let lrv = ar_lrv(&adjusted, k)?;
    let statistic = j_alpha(y, kind, opts.j_alpha, opts.j_replications, k, rng)?;
    Ok(ClassicalTestResult {
        test: ClassicalTest::JAlpha,
        statistic,
        p_value: None,
        tail: Tail::Left,
        lag: k,
        lrv,
    })
}

pub fn run_classical<R: Rng + ?Sized>(
    test: ClassicalTest,
    y: &[f64],
    kind: DeterministicKind,
    rule: LagRule,
    opts: &ClassicalOptions,
    rng: &mut R,
) -> Result<ClassicalTestResult> {
    match test {
        ClassicalTest::AdfGls => adf_gls(y, kind, rule),
        ClassicalTest::MzT => mz_t(y, kind, rule),
        ClassicalTest::JAlpha => j_alpha_test(y, kind, opts, rule, rng),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalNull {
    pub test: ClassicalTest,
    pub detrending: DeterministicKind,
    pub t_len: usize,
    pub lag_rule: LagRule,
    pub replications: usize,
    pub seed: u64,
    /// Sorted ascending.
    pub draws: Vec<f64>,
}

impl ClassicalNull {
    /// Left-tailed `(1 + #{draws ≤ s}) / (R + 1)`.
    pub fn p_value(&self, statistic: f64) -> f64 {
        let at_or_below = self.draws.partition_point(|d| *d <= statistic);
        (1 + at_or_below) as f64 / (self.draws.len() + 1) as f64
    }

    /// Empirical `α` quantile.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(quantile_sorted(&self.draws, alpha))
    }
}

/// Statistic draws on zero-start Gaussian random walks with the same `T`,
/// deterministic kind and lag protocol.
pub fn simulate_classical_null(
    test: ClassicalTest,
    kind: DeterministicKind,
    t_len: usize,
    replications: usize,
    seed: u64,
    rule: LagRule,
    opts: &ClassicalOptions,
) -> Result<ClassicalNull> {
    if replications == 0 {
        return Err(invalid("at least one replication is required"));
    }
    let stream = stream_id(&[
        tags::CLASSICAL_NULL,
        test as u64,
        kind.dim() as u64,
        t_len as u64,
    ]);
    let mut draws = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, stream, r);
            let y = random_walk(&mut rng, t_len);
            run_classical(test, &y, kind, rule, opts, &mut rng).map(|res| res.statistic)
        })
        .collect::<Result<Vec<f64>>>()?;
    sort_floats(&mut draws);
    Ok(ClassicalNull {
        test,
        detrending: kind,
        t_len,
        lag_rule: rule,
        replications,
        seed,
        draws,
    })
}
