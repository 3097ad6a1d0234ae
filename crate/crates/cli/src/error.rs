use std::path::{Path, PathBuf};

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Sim(#[from] dqc1_sim::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Sim(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
            CliError::VerificationFailed(_) => "verification_failed",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
