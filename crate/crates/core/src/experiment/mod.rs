//! Experiment orchestration: identifiability checks, the consistency, LLN and
//! ergodicity experiments, and their CSV output.

mod config;
mod identify;
mod output;
mod runs;

pub use config::{ExperimentConfig, PriorConfig, ThetaMode};
pub use identify::{check_identifiability, IdentifiabilityReport, Violation, VIOLATION_THRESHOLD};
pub use output::{
    write_consistency_csv, write_ergodicity_csv, write_identifiability_csv, write_lln_csv, write_martingale_csv,
};
pub use runs::{
    run_consistency_experiment, run_ergodicity_diagnostic, run_lln_experiment, run_martingale, ExperimentRecord,
    RunOptions,
};
