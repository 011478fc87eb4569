//! Monte Carlo experiments: TOML-described cells of null and alternative
//! DGPs, per-replication scores under common random numbers, nominal and
//! size-adjusted rejection rates.

mod run;
mod spec;
mod table;

pub use run::{
    decisions, local_power_curve, nominal_thresholds, paired_difference, rejection_rate, run_power,
    run_size, simulate_experiment, simulate_scores, size_adjusted_threshold, tabulate, CellScores,
    CellStreams, Evaluator, ScoreMatrix, Threshold,
};
pub use spec::{describe_dgp, CellSpec, ExperimentSpec, TestId};
pub use table::{ResultRow, ResultTable, CSV_HEADER};
