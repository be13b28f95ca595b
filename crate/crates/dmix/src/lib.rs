//! Batch experiment runner on top of `dmix-core`: TOML configs, scenario
//! execution, and CSV/JSON artifacts.

pub mod config;
pub mod output;
pub mod runner;

use std::path::PathBuf;

pub use config::{ExperimentConfig, Finding, Scenario, Severity};
pub use runner::{run, run_path, validate_path, RunReport, Summary};

/// Exit status for a run that failed, by cause.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible baseline: {0}")]
    Infeasible(String),
    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: String,
        source: dmix_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Infeasible(_) => 3,
            RunError::Numerical { .. } => 4,
            RunError::Io { .. } => 5,
        }
    }
}
