//! Configuration loading, experiment orchestration and CSV output for the
//! `comdml` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{oracle_check, profile, run, OracleSummary, RunOutcome};
pub use config::{ExperimentConfig, Mode};
pub use error::{CliError, EXIT_CONFIG, EXIT_RUNTIME};
