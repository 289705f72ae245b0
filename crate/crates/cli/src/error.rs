use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} not found at {}; run `scarystats {command}` first", path.display())]
    MissingPrerequisite {
        what: String,
        path: PathBuf,
        command: &'static str,
    },

    #[error("{} is locked by another run (remove the file if that run is gone)", path.display())]
    Locked { path: PathBuf },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("output check failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] scarystats::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingPrerequisite { .. } => 3,
            CliError::Locked { .. } => 4,
            _ => 1,
        }
    }
}
