//! Simulated null distributions of the knot statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tau_pair, tau_statistic, KnotOptions, TauVariant};
use crate::detrend::DeterministicKind;
use crate::dgp::{gen_arma_near_ur, ou_path};
use crate::error::{invalid, Error, Result};
use crate::rng::{random_walk, stream_id, substream, tags, SimRng};
use crate::stats::{quantile_sorted, sort_floats};
use crate::weights::j_alpha;

/// Length of the AR(1) series on which the asymptotic engine draws `J`.
pub const J_SIM_LENGTH: usize = 1000;

/// How the asymptotic `τ̆` engine obtains `J_{α,c}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JCoupling {
    /// From a separate Gaussian AR(1) with parameter `1 + c/1000`.
    #[default]
    Independent,
    /// From the same OU path, read at 1000 equally spaced points.
    Path,
}

impl JCoupling {
    fn as_str(self) -> &'static str {
        match self {
            JCoupling::Independent => "independent",
            JCoupling::Path => "path",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "engine")]
pub enum NullEngine {
    FiniteSample {
        t_len: usize,
        p: usize,
    },
    Asymptotic {
        c: f64,
        n_steps: usize,
        j_coupling: JCoupling,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    /// Sorted ascending.
    pub draws: Vec<f64>,
    pub engine: NullEngine,
    pub variant: TauVariant,
    pub detrending: DeterministicKind,
    pub replications: usize,
    pub seed: u64,
    pub gamma1: f64,
}

fn kind_code(kind: DeterministicKind) -> u64 {
    kind.dim() as u64
}

fn finalize(mut draws: Vec<f64>) -> Result<Vec<f64>> {
    if draws.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::Numeric("null draw is negative or not finite".into()));
    }
    sort_floats(&mut draws);
    Ok(draws)
}

/// Draws of the statistic on zero-start Gaussian random walks of length
/// `t_len`, `p = 0`, FD-adjusted for `kind`. Replication `r` uses substream
/// `r`, so the result does not depend on the thread count.
pub fn simulate_null_finite(
    variant: TauVariant,
    kind: DeterministicKind,
    t_len: usize,
    replications: usize,
    seed: u64,
    opts: &KnotOptions,
) -> Result<NullDistribution> {
    if t_len < 25 {
        return Err(Error::InvalidLength {
            needed: 25,
            got: t_len,
        });
    }
    if replications == 0 {
        return Err(invalid("at least one replication is required"));
    }
    let stream = stream_id(&[tags::NULL_FINITE, kind_code(kind), t_len as u64]);
    let opts = KnotOptions {
        j_lag: Some(0),
        ..*opts
    };
    let draws = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, stream, r);
            let y = random_walk(&mut rng, t_len);
            match variant {
                TauVariant::Tau => tau_statistic(&y, 0, kind, &opts).map(|t| t.statistic),
                TauVariant::TauIe => {
                    tau_pair(&y, 0, kind, &opts, &mut rng).map(|(_, t)| t.statistic)
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NullDistribution {
        draws: finalize(draws)?,
        engine: NullEngine::FiniteSample { t_len, p: 0 },
        variant,
        detrending: kind,
        replications,
        seed,
        gamma1: opts.gamma1,
    })
}

/// `(X(1)² - 1)² / (4 ∫ X²)` on a discretised path, where `X` is the path
/// itself or, for a linear trend, `X(r) = x(r) - r x(1)`.
pub fn limit_functional(path: &[f64], kind: DeterministicKind) -> f64 {
    let n = path.len();
    let nf = n as f64;
    let end = path[n - 1];
    let (x1, int2) = match kind {
        DeterministicKind::LinearTrend => {
            let s: f64 = path
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let v = x - (i + 1) as f64 / nf * end;
                    v * v
                })
                .sum();
            (0.0, s / nf)
        }
        _ => (end, path.iter().map(|x| x * x).sum::<f64>() / nf),
    };
    let num = x1 * x1 - 1.0;
    num * num / (4.0 * int2)
}

fn j_draw(
    rng: &mut SimRng,
    path: &[f64],
    c: f64,
    kind: DeterministicKind,
    coupling: JCoupling,
    opts: &KnotOptions,
) -> Result<f64> {
    let series = match coupling {
        JCoupling::Independent => gen_arma_near_ur(J_SIM_LENGTH, c, 0.0, 0.0, 0, rng)?,
        JCoupling::Path => {
            let n = path.len();
            (1..=J_SIM_LENGTH)
                .map(|i| path[i * n / J_SIM_LENGTH - 1])
                .collect()
        }
    };
    j_alpha(&series, kind, opts.j_alpha, opts.j_replications, 0, rng)
}

/// Draws of the `γ₁ = 1` limit from Euler-discretised OU paths with
/// `n_steps` steps. For `τ̆` each draw is divided by a `J_{α,c}` draw
/// obtained as set by `coupling`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_null_asymptotic(
    variant: TauVariant,
    kind: DeterministicKind,
    c: f64,
    n_steps: usize,
    replications: usize,
    seed: u64,
    opts: &KnotOptions,
    coupling: JCoupling,
) -> Result<NullDistribution> {
    if !(c <= 0.0) {
        return Err(invalid(format!("c must be non-positive, got {c}")));
    }
    if n_steps < 1000 {
        return Err(invalid(format!(
            "at least 1000 steps are required, got {n_steps}"
        )));
    }
    if opts.gamma1 != 1.0 {
        return Err(invalid("the asymptotic engine covers gamma1 = 1 only"));
    }
    if replications == 0 {
        return Err(invalid("at least one replication is required"));
    }
    let stream = stream_id(&[
        tags::NULL_ASYMPTOTIC,
        kind_code(kind),
        c.to_bits(),
        n_steps as u64,
        coupling as u64,
    ]);
    let draws = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, stream, r);
            let path = ou_path(c, n_steps, &mut rng)?;
            let stat = limit_functional(&path, kind);
            match variant {
                TauVariant::Tau => Ok(stat),
                TauVariant::TauIe => Ok(stat / j_draw(&mut rng, &path, c, kind, coupling, opts)?),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NullDistribution {
        draws: finalize(draws)?,
        engine: NullEngine::Asymptotic {
            c,
            n_steps,
            j_coupling: coupling,
        },
        variant,
        detrending: kind,
        replications,
        seed,
        gamma1: 1.0,
    })
}

/// Right-tailed p-value `(1 + #{draws ≥ s}) / (R + 1)`.
pub fn p_value(statistic: f64, null: &NullDistribution) -> f64 {
    let below = null.draws.partition_point(|d| *d < statistic);
    let at_or_above = null.draws.len() - below;
    (1 + at_or_above) as f64 / (null.draws.len() + 1) as f64
}

/// Right-tail critical values: the `1 - α` empirical quantile for each `α`.
pub fn critical_values(null: &NullDistribution, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if null.draws.is_empty() {
        return Err(invalid("empty null distribution"));
    }
    alphas
        .iter()
        .map(|&a| {
            if !(a > 0.0 && a <= 1.0) {
                return Err(invalid(format!("alpha must lie in (0, 1], got {a}")));
            }
            Ok((a, quantile_sorted(&null.draws, 1.0 - a)))
        })
        .collect()
}

impl NullDistribution {
    pub fn from_draws(
        draws: Vec<f64>,
        engine: NullEngine,
        variant: TauVariant,
        detrending: DeterministicKind,
        seed: u64,
        gamma1: f64,
    ) -> Result<Self> {
        if draws.is_empty() {
            return Err(invalid("empty null distribution"));
        }
        let draws = finalize(draws)?;
        Ok(Self {
            replications: draws.len(),
            draws,
            engine,
            variant,
            detrending,
            seed,
            gamma1,
        })
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut m = Vec::new();
        match self.engine {
            NullEngine::FiniteSample { t_len, p } => {
                m.push(("engine".into(), "finite_sample".into()));
                m.push(("t_len".into(), t_len.to_string()));
                m.push(("p".into(), p.to_string()));
            }
            NullEngine::Asymptotic {
                c,
                n_steps,
                j_coupling,
            } => {
                m.push(("engine".into(), "asymptotic".into()));
                m.push(("c".into(), c.to_string()));
                m.push(("n_steps".into(), n_steps.to_string()));
                m.push(("j_coupling".into(), j_coupling.as_str().into()));
            }
        }
        m.push(("variant".into(), self.variant.to_string()));
        m.push(("detrending".into(), self.detrending.to_string()));
        m.push(("replications".into(), self.replications.to_string()));
        m.push(("seed".into(), self.seed.to_string()));
        m.push(("gamma1".into(), self.gamma1.to_string()));
        m
    }

    /// `# key=value` metadata lines, a `draw` header, then one draw per line.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.metadata() {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str("draw\n");
        for d in &self.draws {
            s.push_str(&format!("{d}\n"));
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut meta = std::collections::HashMap::new();
        let mut draws = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if line == "draw" {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| invalid(format!("line {}: '{line}' is not a number", lineno + 1)))?;
            draws.push(v);
        }
        let get = |k: &str| -> Result<&String> {
            meta.get(k)
                .ok_or_else(|| invalid(format!("missing metadata key '{k}'")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse::<f64>()
                .map_err(|_| invalid(format!("metadata '{k}' is not numeric")))
        };
        let engine = match get("engine")?.as_str() {
            "finite_sample" => NullEngine::FiniteSample {
                t_len: num("t_len")? as usize,
                p: num("p")? as usize,
            },
            "asymptotic" => NullEngine::Asymptotic {
                c: num("c")?,
                n_steps: num("n_steps")? as usize,
                j_coupling: match meta.get("j_coupling").map(String::as_str) {
                    Some("path") => JCoupling::Path,
                    _ => JCoupling::Independent,
                },
            },
            other => return Err(invalid(format!("unknown engine '{other}'"))),
        };
        let variant = get("variant")?.parse()?;
        let detrending = get("detrending")?.parse()?;
        let seed = get("seed")?
            .parse::<u64>()
            .map_err(|_| invalid("metadata 'seed' is not an integer"))?;
        let gamma1 = meta.get("gamma1").map_or(Ok(1.0), |_| num("gamma1"))?;
        let out = Self::from_draws(draws, engine, variant, detrending, seed, gamma1)?;
        if let Ok(r) = num("replications") {
            if r as usize != out.replications {
                return Err(invalid(format!(
                    "metadata claims {r} replications but {} draws were read",
                    out.replications
                )));
            }
        }
        Ok(out)
    }
}
