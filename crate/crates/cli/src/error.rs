use std::path::PathBuf;

use umd_core::UmdError;

use crate::ingest::IngestError;

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const SOLVER: u8 = 2;
    pub const IO: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Solver(#[from] UmdError),
    /// Some sweep cells failed; each was reported as it finished.
    #[error("{failed} of {total} cells failed")]
    Cells { failed: usize, total: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Solver(_) | CliError::Cells { .. } => exit::SOLVER,
            CliError::Io { .. } => exit::IO,
            CliError::Ingest(IngestError::Io { .. }) => exit::IO,
            // A malformed dataset is a bad input, same as a bad config.
            CliError::Ingest(_) => exit::CONFIG,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
