//! Command layer: run, scan, extrapolate and check-equivalence.
//!
//! A run directory holds `config.ini`, `measurements.csv`, `checkpoint.bin`
//! and, when enabled, `polyakov.csv`.

mod checkpoint;
mod commands;
mod config;
mod csv;

use thiserror::Error;

pub use checkpoint::Checkpoint;
pub use commands::{
    child_seed, cmd_check_equivalence, cmd_extrapolate, cmd_run, cmd_scan, estimate_observable, run_chain, run_config, EquivalenceReport,
    ExtrapolationReport, RunOptions, RunSummary, ScanAxis, EXTRA_OBSERVABLES,
};
pub use config::{ActionKind, RunConfig, Start};
pub use csv::{read_measurements, MeasurementRow, MEASUREMENT_COLUMNS, SCATTER_COLUMNS};

pub const CONFIG_FILE: &str = "config.ini";
pub const MEASUREMENTS_FILE: &str = "measurements.csv";
pub const SCATTER_FILE: &str = "polyakov.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint was written by config {found}, current config is {expected}")]
    CheckpointMismatch { expected: String, found: String },
}

impl RunError {
    /// 1 usage/config, 2 numerical, 3 checkpoint.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Numerical(_) => 2,
            RunError::Checkpoint(_) | RunError::CheckpointMismatch { .. } => 3,
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<crate::analysis::AnalysisError> for RunError {
    fn from(e: crate::analysis::AnalysisError) -> Self {
        RunError::Numerical(e.to_string())
    }
}

impl From<crate::hmc::HmcError> for RunError {
    fn from(e: crate::hmc::HmcError) -> Self {
        RunError::Numerical(e.to_string())
    }
}
