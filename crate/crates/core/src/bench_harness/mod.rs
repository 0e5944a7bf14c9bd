//! Experiment configuration, sweeps, CSV output, rate fitting, exact
//! reduction checks and the invariant suite behind `fedvi verify`.

pub mod config;
mod fit;
mod reduction;
pub mod rows;
mod runner;
mod verify;

pub use config::{AlgorithmId, ExperimentConfig, SweepPoint, DEFAULT_MAX_RUNS};
pub use fit::{fit_power_law, fit_rate, RateFit, MIN_FIT_POINTS};
pub use reduction::{compare_reduction, compare_reduction_with, ReductionReport};
pub use rows::{read_csv, read_csv_file, rows_to_csv, write_csv, ResultRow, CSV_COLUMNS};
pub use runner::{
    build_operator, execute_run, prepare_run, run_experiment, run_experiment_with, run_plan, ExperimentOutput,
    PreparedRun, RunOptions,
};
pub use verify::{verify, CheckResult, VerifyReport};
