use std::path::PathBuf;

use thiserror::Error;

/// Failures of a simulation run, grouped by exit status.
#[derive(Debug, Error)]
pub enum SimError {
    /// Bad configuration, named by its key path.
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(#[from] trepr_core::Error),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> SimError {
        SimError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> SimError {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config { .. } => exit::CONFIG,
            SimError::Numerical(_) => exit::NUMERICAL,
            SimError::Io { .. } => exit::IO,
        }
    }
}

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const IO: i32 = 4;
}

pub type Result<T> = std::result::Result<T, SimError>;
