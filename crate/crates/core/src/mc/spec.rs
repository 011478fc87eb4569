use serde::{Deserialize, Serialize};

use crate::detrend::DeterministicKind;
use crate::dgp::{DgpFamily, DEFAULT_BURN_IN};
use crate::error::{Error, Result};
use crate::knot_tests::KnotOptions;
use crate::lag_select::LagRule;

/// Tests the harness can run on each replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestId {
    Tau,
    TauIe,
    SpacingLar,
    SpacingAlar,
    SpacingAlarIe,
    AlBic,
    AlieBic,
    AdfGls,
    MzT,
    JAlpha,
}

impl TestId {
    pub const ALL: [TestId; 10] = [
        TestId::Tau,
        TestId::TauIe,
        TestId::SpacingLar,
        TestId::SpacingAlar,
        TestId::SpacingAlarIe,
        TestId::AlBic,
        TestId::AlieBic,
        TestId::AdfGls,
        TestId::MzT,
        TestId::JAlpha,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TestId::Tau => "tau",
            TestId::TauIe => "tau_ie",
            TestId::SpacingLar => "spacing_lar",
            TestId::SpacingAlar => "spacing_alar",
            TestId::SpacingAlarIe => "spacing_alar_ie",
            TestId::AlBic => "al_bic",
            TestId::AlieBic => "alie_bic",
            TestId::AdfGls => "adf_gls",
            TestId::MzT => "mz_t",
            TestId::JAlpha => "j_alpha",
        }
    }

    /// Whether power is reported size-adjusted when adjustment is requested.
    /// The plain spacing test and the BIC activation rates are always raw.
    pub fn size_adjustable(self) -> bool {
        !matches!(self, TestId::SpacingLar | TestId::AlBic | TestId::AlieBic)
    }

    /// Whether the test needs `J_α`.
    pub fn uses_j(self) -> bool {
        matches!(
            self,
            TestId::TauIe | TestId::SpacingAlarIe | TestId::AlieBic | TestId::JAlpha
        )
    }

    pub(crate) fn uses_path(self) -> bool {
        !matches!(self, TestId::AdfGls | TestId::MzT | TestId::JAlpha)
    }
}

impl std::fmt::Display for TestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| crate::error::invalid(format!("unknown test '{s}'")))
    }
}

/// One experiment cell: a null DGP and the alternatives compared against it
/// with common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub label: String,
    pub null: DgpFamily,
    #[serde(default)]
    pub alternatives: Vec<DgpFamily>,
}

fn default_level() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

fn default_cv_replications() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_true")]
    pub size_adjust: bool,
    pub sample_sizes: Vec<usize>,
    pub tests: Vec<TestId>,
    #[serde(default)]
    pub detrending: DeterministicKind,
    #[serde(default)]
    pub lag_rule: LagRule,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Replications of the finite-sample nulls behind nominal critical values.
    #[serde(default = "default_cv_replications")]
    pub cv_replications: usize,
    #[serde(default)]
    pub knot: KnotOptions,
    pub cells: Vec<CellSpec>,
}

fn config(msg: String) -> Error {
    Error::Config(msg)
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config("name: must not be empty".into()));
        }
        if self.replications < 100 {
            return Err(config(format!(
                "replications: need at least 100, got {}",
                self.replications
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(config(format!(
                "level: must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.sample_sizes.is_empty() {
            return Err(config("sample_sizes: must not be empty".into()));
        }
        for (i, &t) in self.sample_sizes.iter().enumerate() {
            if t < 25 {
                return Err(config(format!(
                    "sample_sizes[{i}]: need at least 25, got {t}"
                )));
            }
        }
        if self.tests.is_empty() {
            return Err(config("tests: must not be empty".into()));
        }
        for (i, t) in self.tests.iter().enumerate() {
            if self.tests[..i].contains(t) {
                return Err(config(format!("tests[{i}]: '{t}' is listed twice")));
            }
        }
        if self.cv_replications < 100 {
            return Err(config(format!(
                "cv_replications: need at least 100, got {}",
                self.cv_replications
            )));
        }
        if !(self.knot.gamma1 > 0.5) {
            return Err(config(format!(
                "knot.gamma1: must exceed 0.5, got {}",
                self.knot.gamma1
            )));
        }
        if !(self.knot.gamma2 > 0.0) {
            return Err(config(format!(
                "knot.gamma2: must be positive, got {}",
                self.knot.gamma2
            )));
        }
        if !(self.knot.j_alpha > 0.0 && self.knot.j_alpha < 0.5) {
            return Err(config(format!(
                "knot.j_alpha: must lie in (0, 0.5), got {}",
                self.knot.j_alpha
            )));
        }
        if self.knot.j_replications < 20 {
            return Err(config(format!(
                "knot.j_replications: need at least 20, got {}",
                self.knot.j_replications
            )));
        }
        if let LagRule::Fixed(k) = self.lag_rule {
            let t_min = *self.sample_sizes.iter().min().unwrap();
            if t_min < k + 10 {
                return Err(config(format!(
                    "lag_rule: fixed lag {k} needs T >= {}, smallest sample size is {t_min}",
                    k + 10
                )));
            }
        }
        if self.cells.is_empty() {
            return Err(config("cells: must not be empty".into()));
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.label.trim().is_empty() {
                return Err(config(format!("cells[{i}].label: must not be empty")));
            }
            if self.cells[..i].iter().any(|c| c.label == cell.label) {
                return Err(config(format!(
                    "cells[{i}].label: '{}' is used twice",
                    cell.label
                )));
            }
            cell.null
                .validate()
                .map_err(|e| config(format!("cells[{i}].null: {e}")))?;
            if !cell.null.is_null() {
                return Err(config(format!(
                    "cells[{i}].null: the null DGP must have a unit root"
                )));
            }
            for (j, alt) in cell.alternatives.iter().enumerate() {
                alt.validate()
                    .map_err(|e| config(format!("cells[{i}].alternatives[{j}]: {e}")))?;
            }
        }
        Ok(())
    }
}

/// Short label of a DGP for result tables.
pub fn describe_dgp(dgp: &DgpFamily) -> String {
    match dgp {
        DgpFamily::AdfForm {
            rho_star,
            delta_star,
        } => {
            format!("adf_form rho={rho_star} lags={}", delta_star.len())
        }
        DgpFamily::ArmaNearUr { c, phi, theta } => {
            format!("arma_near_ur c={c} phi={phi} theta={theta}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
seed = 7
replications = 200
sample_sizes = [100]
tests = ["tau", "tau_ie", "adf_gls"]
detrending = "constant"

[[cells]]
label = "ar"
null = { family = "arma_near_ur", c = 0.0 }
alternatives = [{ family = "arma_near_ur", c = -10.0 }]
"#;

    #[test]
    fn parses_with_defaults() {
        let spec = ExperimentSpec::from_toml_str(MINIMAL).unwrap();
        assert_eq!(spec.level, 0.05);
        assert!(spec.size_adjust);
        assert_eq!(spec.burn_in, DEFAULT_BURN_IN);
        assert_eq!(spec.lag_rule, LagRule::Maic);
        assert_eq!(spec.detrending, DeterministicKind::Constant);
        assert_eq!(spec.cells[0].alternatives.len(), 1);
        let back = ExperimentSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn fixed_lag_rule_parses() {
        let text = MINIMAL.replace("detrending = \"constant\"", "lag_rule = { fixed = 4 }");
        let spec = ExperimentSpec::from_toml_str(&text).unwrap();
        assert_eq!(spec.lag_rule, LagRule::Fixed(4));
    }

    fn err_of(text: &str) -> String {
        match ExperimentSpec::from_toml_str(text) {
            Err(Error::Config(m)) => m,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert!(
            err_of(&MINIMAL.replace("replications = 200", "replications = 20"))
                .starts_with("replications")
        );
        assert!(err_of(&MINIMAL.replace("[100]", "[100, 10]")).starts_with("sample_sizes[1]"));
        assert!(err_of(&MINIMAL.replace("c = -10.0", "c = 1.0"))
            .starts_with("cells[0].alternatives[0]"));
        assert!(err_of(&MINIMAL.replace("c = 0.0", "c = -3.0")).starts_with("cells[0].null"));
        assert!(err_of(&MINIMAL.replace("\"adf_gls\"", "\"tau\"")).starts_with("tests[2]"));
        assert!(err_of(&MINIMAL.replace("seed = 7", "seed = 7\nbogus = 1")).contains("bogus"));
        assert!(err_of(&MINIMAL.replace("\"adf_gls\"", "\"pp\"")).contains("pp"));
    }

    #[test]
    fn nonstationary_alternative_is_rejected() {
        let text = MINIMAL.replace(
            "alternatives = [{ family = \"arma_near_ur\", c = -10.0 }]",
            "alternatives = [{ family = \"adf_form\", rho_star = -0.05, delta_star = [1.2] }]",
        );
        assert!(err_of(&text).starts_with("cells[0].alternatives[0]"));
    }

    #[test]
    fn test_ids_round_trip() {
        for t in TestId::ALL {
            assert_eq!(t.as_str().parse::<TestId>().unwrap(), t);
        }
        assert!(!TestId::SpacingLar.size_adjustable());
        assert!(TestId::SpacingAlarIe.size_adjustable());
    }
}
