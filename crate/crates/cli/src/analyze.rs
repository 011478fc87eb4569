//! The `analyze` command: all tests on one observed series.

use alurt::classical::{
    adf_gls, mz_t, simulate_classical_null, ClassicalNull, ClassicalOptions, ClassicalTest,
};
use alurt::detrend::DeterministicKind;
use alurt::knot_tests::{
    knot_statistic, p_value, simulate_null_finite, KnotOptions, NullDistribution, PreparedSeries,
    TauVariant,
};
use alurt::lag_select::{resolve_lag, LagRule};
use alurt::lars::{bic_tune, compute_path, PathMode};
use alurt::mc::TestId;
use alurt::rng::{stream_id, substream};
use alurt::spacing::{spacing_with_weights, SpacingVariant};
use alurt::weights::{enriched_weights, j_alpha, ols_weights, PenaltyWeights};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Stream tag of the analysis RNG (the `J_α` draw).
const ANALYZE_STREAM: u64 = 0x616e_616c_797a_6500;

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub test: TestId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    /// Unit root rejected: `p_value < alpha`, or activation of `y_{t-1}`
    /// for the BIC classifiers.
    pub reject: bool,
    pub classification: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activation_knot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bic_lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input: InputInfo,
    pub t_len: usize,
    pub detrending: DeterministicKind,
    pub lag_order: usize,
    pub alpha: f64,
    pub seed: u64,
    pub cv_seed: u64,
    pub null_replications: usize,
    pub tests: Vec<TestReport>,
}

pub struct AnalyzeSettings {
    pub kind: DeterministicKind,
    pub tests: Vec<TestId>,
    pub alpha: f64,
    pub seed: u64,
    pub cv_seed: u64,
    pub null_replications: usize,
    pub tau_null: Option<NullDistribution>,
    pub tau_ie_null: Option<NullDistribution>,
}

fn classify(reject: bool) -> &'static str {
    if reject {
        "stationary"
    } else {
        "unit_root"
    }
}

fn base(test: TestId, statistic: Option<f64>, p: Option<f64>, reject: bool) -> TestReport {
    TestReport {
        test,
        statistic,
        p_value: p,
        reject,
        classification: classify(reject),
        j_value: None,
        activation_knot: None,
        entry_step: None,
        bic_lambda: None,
    }
}

fn knot_null(
    given: &Option<NullDistribution>,
    variant: TauVariant,
    t_len: usize,
    s: &AnalyzeSettings,
) -> alurt::Result<NullDistribution> {
    match given {
        Some(n) => {
            if n.variant != variant || n.detrending != s.kind {
                return Err(alurt::Error::InvalidArgument(format!(
                    "null file is for {} with {} adjustment, need {} with {}",
                    n.variant, n.detrending, variant, s.kind
                )));
            }
            Ok(n.clone())
        }
        None => simulate_null_finite(
            variant,
            s.kind,
            t_len,
            s.null_replications,
            s.cv_seed,
            &KnotOptions::default(),
        ),
    }
}

fn classical_null(
    test: ClassicalTest,
    t_len: usize,
    s: &AnalyzeSettings,
) -> alurt::Result<ClassicalNull> {
    simulate_classical_null(
        test,
        s.kind,
        t_len,
        s.null_replications,
        s.cv_seed,
        LagRule::Maic,
        &ClassicalOptions::default(),
    )
}

pub fn analyze(y: &[f64], input: InputInfo, s: &AnalyzeSettings) -> alurt::Result<AnalysisReport> {
    if y.len() < 25 {
        return Err(alurt::Error::InvalidLength {
            needed: 25,
            got: y.len(),
        });
    }
    let kind = s.kind;
    let t_len = y.len();
    let k = resolve_lag(y, kind, LagRule::Maic)?;
    let opts = KnotOptions::default();
    let needs_path = s
        .tests
        .iter()
        .any(|t| !matches!(t, TestId::AdfGls | TestId::MzT | TestId::JAlpha));
    let prep = if needs_path {
        Some(PreparedSeries::new(y, k, kind)?)
    } else {
        None
    };
    let j = if s.tests.iter().any(|t| t.uses_j()) {
        let mut rng = substream(s.seed, stream_id(&[ANALYZE_STREAM]), 0);
        Some(j_alpha(
            y,
            kind,
            opts.j_alpha,
            opts.j_replications,
            k,
            &mut rng,
        )?)
    } else {
        None
    };
    let adaptive = match &prep {
        Some(p) => Some(ols_weights(&p.fit, opts.gamma1, opts.gamma2)?),
        None => None,
    };
    let enriched = match (&prep, j) {
        (Some(p), Some(j)) => Some(enriched_weights(&p.fit, j, opts.gamma1, opts.gamma2)?),
        _ => None,
    };
    let prep_ref = || {
        prep.as_ref()
            .expect("path-based test without prepared design")
    };

    let mut reports = Vec::with_capacity(s.tests.len());
    for &test in &s.tests {
        let report = match test {
            TestId::Tau | TestId::TauIe => {
                let (variant, w, given) = if test == TestId::Tau {
                    (TauVariant::Tau, adaptive.as_ref().unwrap(), &s.tau_null)
                } else {
                    (
                        TauVariant::TauIe,
                        enriched.as_ref().unwrap(),
                        &s.tau_ie_null,
                    )
                };
                let r = knot_statistic(prep_ref(), w, variant, kind, t_len)?;
                let null = knot_null(given, variant, t_len, s)?;
                let p = p_value(r.statistic, &null);
                let mut out = base(test, Some(r.statistic), Some(p), p < s.alpha);
                out.j_value = r.j_value;
                out.activation_knot = r.lambda0;
                out
            }
            TestId::SpacingLar | TestId::SpacingAlar | TestId::SpacingAlarIe => {
                let pr = prep_ref();
                let (variant, w) = match test {
                    TestId::SpacingLar => (SpacingVariant::Plain, PenaltyWeights::uniform(k)),
                    TestId::SpacingAlar => (SpacingVariant::Adaptive, adaptive.clone().unwrap()),
                    _ => (SpacingVariant::Enriched, enriched.clone().unwrap()),
                };
                let r = spacing_with_weights(&pr.design, &w, pr.fit.sigma2_hat, variant)?;
                let mut out = base(test, None, Some(r.p_value), r.p_value < s.alpha);
                out.j_value = r.j_value;
                out.entry_step = Some(r.step);
                out
            }
            TestId::AlBic | TestId::AlieBic => {
                let w = if test == TestId::AlBic {
                    adaptive.as_ref().unwrap()
                } else {
                    enriched.as_ref().unwrap()
                };
                let pr = prep_ref();
                let (active, lambda) = if w.w1.is_infinite() {
                    (false, None)
                } else {
                    let choice =
                        bic_tune(&compute_path(&pr.design, w, PathMode::Lasso)?, &pr.design)?;
                    (choice.active.contains(&0), Some(choice.lambda))
                };
                let mut out = base(test, None, None, active);
                out.j_value = w.j_value;
                out.bic_lambda = lambda;
                out
            }
            TestId::AdfGls | TestId::MzT | TestId::JAlpha => {
                let (ct, stat) = match test {
                    TestId::AdfGls => (
                        ClassicalTest::AdfGls,
                        adf_gls(y, kind, LagRule::Fixed(k))?.statistic,
                    ),
                    TestId::MzT => (
                        ClassicalTest::MzT,
                        mz_t(y, kind, LagRule::Fixed(k))?.statistic,
                    ),
                    _ => (ClassicalTest::JAlpha, j.unwrap()),
                };
                let p = classical_null(ct, t_len, s)?.p_value(stat);
                base(test, Some(stat), Some(p), p < s.alpha)
            }
        };
        reports.push(report);
    }
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        input,
        t_len,
        detrending: kind,
        lag_order: k,
        alpha: s.alpha,
        seed: s.seed,
        cv_seed: s.cv_seed,
        null_replications: s.null_replications,
        tests: reports,
    })
}
