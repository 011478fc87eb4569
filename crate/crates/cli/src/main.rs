//! `alurt`: unit root tests on observed series, critical-value simulation
//! and Monte Carlo experiments.
//!
//! Exit codes: 0 success, 2 unparseable input or invalid configuration,
//! 3 series too short, 4 degenerate or numerically singular data, 5 I/O.

mod analyze;
mod ingest;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alurt::classical::{simulate_classical_null, ClassicalOptions, ClassicalTest};
use alurt::detrend::DeterministicKind;
use alurt::knot_tests::{
    critical_values, simulate_null_asymptotic, simulate_null_finite, JCoupling, KnotOptions,
    NullDistribution, TauVariant,
};
use alurt::lag_select::LagRule;
use alurt::mc::{run_power, ExperimentSpec, TestId};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use analyze::{AnalyzeSettings, InputInfo};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_CV_SEED: u64 = 20_240_611;
const CV_LEVELS: [f64; 4] = [0.01, 0.025, 0.05, 0.10];

#[derive(Parser)]
#[command(
    name = "alurt",
    version,
    about = "Adaptive Lasso activation-knot unit root tests"
)]
struct Cli {
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true, env = "ALURT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Detrending {
    None,
    #[value(alias = "constant")]
    Const,
    #[value(alias = "linear_trend")]
    Trend,
}

impl From<Detrending> for DeterministicKind {
    fn from(d: Detrending) -> Self {
        match d {
            Detrending::None => DeterministicKind::None,
            Detrending::Const => DeterministicKind::Constant,
            Detrending::Trend => DeterministicKind::LinearTrend,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Finite,
    Asymptotic,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tests on a series read from CSV and print a JSON report.
    Analyze {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "const")]
        detrending: Detrending,
        /// Comma-separated test names, or "all".
        #[arg(long, default_value = "all")]
        tests: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Seed of the J_α draw.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Seed of the simulated null distributions.
        #[arg(long, default_value_t = DEFAULT_CV_SEED)]
        cv_seed: u64,
        /// Replications of the simulated null distributions.
        #[arg(long, default_value_t = 10_000)]
        null_reps: usize,
        /// Saved τ null draws (from simulate-cv) to use instead of simulating.
        #[arg(long)]
        tau_null: Option<PathBuf>,
        /// Saved τ̆ null draws.
        #[arg(long)]
        tau_ie_null: Option<PathBuf>,
        /// Ignore --tau-null/--tau-ie-null and simulate the nulls.
        #[arg(long)]
        regenerate_cv: bool,
    },
    /// Simulate a null distribution and write draws plus a critical-value table.
    SimulateCv {
        /// tau, tau_ie, adf_gls, mz_t or j_alpha.
        #[arg(long)]
        test: String,
        #[arg(long, value_enum, default_value = "const")]
        detrending: Detrending,
        #[arg(long, value_enum, default_value = "finite")]
        engine: Engine,
        /// Sample size of the finite-sample engine.
        #[arg(long, default_value_t = 100)]
        t_len: usize,
        /// Discretisation steps of the asymptotic engine.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Draw J on the same path in the asymptotic engine.
        #[arg(long)]
        coupled_j: bool,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_CV_SEED)]
        seed: u64,
        /// Output file for the draws; the table goes to `<stem>.cv.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo experiment described by a TOML file.
    Mc {
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Core(alurt::Error),
    Parse(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io(_) => 5,
            CliError::Core(e) => match e {
                alurt::Error::InvalidArgument(_) | alurt::Error::Config(_) => 2,
                alurt::Error::InvalidLength { .. } => 3,
                alurt::Error::Singular(_)
                | alurt::Error::Degenerate(_)
                | alurt::Error::Numeric(_) => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Parse(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<alurt::Error> for CliError {
    fn from(e: alurt::Error) -> Self {
        CliError::Core(e)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String, CliError> {
    String::from_utf8(bytes)
        .map_err(|_| CliError::Parse(format!("{}: not valid UTF-8", path.display())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_tests(spec: &str) -> Result<Vec<TestId>, CliError> {
    if spec.trim() == "all" {
        return Ok(TestId::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let t: TestId = name.parse()?;
        if !out.contains(&t) {
            out.push(t);
        }
    }
    if out.is_empty() {
        return Err(CliError::Parse("--tests: no tests given".into()));
    }
    Ok(out)
}

fn load_null(path: &Path) -> Result<NullDistribution, CliError> {
    let text = utf8(path, read(path)?)?;
    NullDistribution::from_csv_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    csv: &Path,
    detrending: Detrending,
    tests: &str,
    alpha: f64,
    seed: u64,
    cv_seed: u64,
    null_reps: usize,
    tau_null: Option<&Path>,
    tau_ie_null: Option<&Path>,
    regenerate_cv: bool,
) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Parse(format!(
            "--alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if null_reps < 100 {
        return Err(CliError::Parse(format!(
            "--null-reps must be at least 100, got {null_reps}"
        )));
    }
    let tests = parse_tests(tests)?;
    let bytes = read(csv)?;
    let digest = sha256_hex(&bytes);
    let text = utf8(csv, bytes)?;
    let y = ingest::parse_series(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", csv.display())))?;
    let (tau_null, tau_ie_null) = if regenerate_cv {
        (None, None)
    } else {
        (
            tau_null.map(load_null).transpose()?,
            tau_ie_null.map(load_null).transpose()?,
        )
    };
    let settings = AnalyzeSettings {
        kind: detrending.into(),
        tests,
        alpha,
        seed,
        cv_seed,
        null_replications: null_reps,
        tau_null,
        tau_ie_null,
    };
    let input = InputInfo {
        path: csv.display().to_string(),
        sha256: digest,
    };
    let report = analyze::analyze(&y, input, &settings)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serialises")
    );
    Ok(())
}

fn cv_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "null".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.cv.csv"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate_cv(
    test: &str,
    detrending: Detrending,
    engine: Engine,
    t_len: usize,
    steps: usize,
    coupled_j: bool,
    reps: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let kind: DeterministicKind = detrending.into();
    let test: TestId = test.parse()?;
    let (draws_csv, table) = match test {
        TestId::Tau | TestId::TauIe => {
            let variant = if test == TestId::Tau {
                TauVariant::Tau
            } else {
                TauVariant::TauIe
            };
            let opts = KnotOptions::default();
            let null = match engine {
                Engine::Finite => simulate_null_finite(variant, kind, t_len, reps, seed, &opts)?,
                Engine::Asymptotic => {
                    let coupling = if coupled_j {
                        JCoupling::Path
                    } else {
                        JCoupling::Independent
                    };
                    simulate_null_asymptotic(
                        variant, kind, 0.0, steps, reps, seed, &opts, coupling,
                    )?
                }
            };
            (null.to_csv_string(), critical_values(&null, &CV_LEVELS)?)
        }
        TestId::AdfGls | TestId::MzT | TestId::JAlpha => {
            if matches!(engine, Engine::Asymptotic) {
                return Err(CliError::Parse(format!(
                    "{test}: only the finite-sample engine is available"
                )));
            }
            let ct = match test {
                TestId::AdfGls => ClassicalTest::AdfGls,
                TestId::MzT => ClassicalTest::MzT,
                _ => ClassicalTest::JAlpha,
            };
            let null = simulate_classical_null(
                ct,
                kind,
                t_len,
                reps,
                seed,
                LagRule::Maic,
                &ClassicalOptions::default(),
            )?;
            let mut text = format!(
                "# test={test}\n# detrending={kind}\n# engine=finite\n# t_len={t_len}\n# lag_rule=maic\n# tail=left\n# replications={reps}\n# seed={seed}\ndraw\n"
            );
            for d in &null.draws {
                text.push_str(&format!("{d:?}\n"));
            }
            let table = CV_LEVELS
                .iter()
                .map(|&a| null.critical_value(a).map(|c| (a, c)))
                .collect::<alurt::Result<Vec<_>>>()?;
            (text, table)
        }
        other => {
            return Err(CliError::Parse(format!(
                "{other} has no simulated null; use tau, tau_ie, adf_gls, mz_t or j_alpha"
            )))
        }
    };
    write(out, &draws_csv)?;
    let mut cv = String::from("alpha,critical_value\n");
    for (a, c) in table {
        cv.push_str(&format!("{a},{c:?}\n"));
    }
    write(&cv_path(out), &cv)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    tool_version: &'a str,
    config_sha256: String,
    seed: u64,
    replications: usize,
    cv_replications: usize,
    level: f64,
    size_adjust: bool,
    sample_sizes: &'a [usize],
    tests: &'a [TestId],
    results: &'a str,
}

fn cmd_mc(config: &Path, out_dir: &Path) -> Result<(), CliError> {
    let bytes = read(config)?;
    let digest = sha256_hex(&bytes);
    let text = utf8(config, bytes)?;
    let spec = ExperimentSpec::from_toml_str(&text)?;
    let table = run_power(&spec)?;
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let results = "results.csv";
    write(&out_dir.join(results), &table.to_csv_string())?;
    let manifest = Manifest {
        name: &spec.name,
        tool_version: env!("CARGO_PKG_VERSION"),
        config_sha256: digest,
        seed: spec.seed,
        replications: spec.replications,
        cv_replications: spec.cv_replications,
        level: spec.level,
        size_adjust: spec.size_adjust,
        sample_sizes: &spec.sample_sizes,
        tests: &spec.tests,
        results,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write(&out_dir.join("manifest.json"), &(json + "\n"))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Parse("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Parse(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Analyze {
            csv,
            detrending,
            tests,
            alpha,
            seed,
            cv_seed,
            null_reps,
            tau_null,
            tau_ie_null,
            regenerate_cv,
        } => cmd_analyze(
            &csv,
            detrending,
            &tests,
            alpha,
            seed,
            cv_seed,
            null_reps,
            tau_null.as_deref(),
            tau_ie_null.as_deref(),
            regenerate_cv,
        ),
        Command::SimulateCv {
            test,
            detrending,
            engine,
            t_len,
            steps,
            coupled_j,
            reps,
            seed,
            out,
        } => cmd_simulate_cv(
            &test, detrending, engine, t_len, steps, coupled_j, reps, seed, &out,
        ),
        Command::Mc { config, out_dir } => cmd_mc(&config, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
