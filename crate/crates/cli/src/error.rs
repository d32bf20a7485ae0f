use std::path::PathBuf;

use ergolab_core::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Lab(#[from] LabError),

    #[error("{failed} invariant check(s) failed; report written to {report}")]
    InvariantFailure { failed: usize, report: PathBuf },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::Validation(vec![message.into()])
    }

    /// 0 success, 1 invariant failure, 2 validation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::InvariantFailure { .. } => 1,
            Self::Validation(_) | Self::Lab(_) => 2,
            Self::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
