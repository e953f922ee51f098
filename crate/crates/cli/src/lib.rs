//! Batch front-end: run configurations, parameter-grid sweeps, report
//! emission, oracle cross-validation, and SLD dumps.

pub mod config;
pub mod dump;
pub mod report;
pub mod sweep;

use std::path::PathBuf;

use thiserror::Error;

/// Exit codes: 0 ok, 1 check failure, 2 config/usage error, 3 numerical
/// failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("numerical failure at grid point {index} {point:?}: {message}")]
    Numerical {
        index: usize,
        point: Vec<f64>,
        message: String,
    },

    #[error("{violations} check(s) outside tolerance")]
    CheckFailed { violations: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::CheckFailed { .. } => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
