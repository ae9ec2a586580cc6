use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("bad config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        source: toml::de::Error,
    },

    #[error(transparent)]
    Core(#[from] hitchin_core::Error),

    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),

    #[error("writing output: {0}")]
    Csv(#[from] csv::Error),
}

/// What goes to stderr when a command fails.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    /// 1 for numerical or output failures, 2 for bad usage.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::ConfigRead { .. } | CliError::ConfigParse { .. } => 2,
            CliError::Core(hitchin_core::Error::InvalidInput(_) | hitchin_core::Error::Domain(_)) => 2,
            CliError::Core(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::ConfigRead { .. } | CliError::ConfigParse { .. } => "config",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(hitchin_core::Error::InvalidInput(_)) => "invalid_input",
            CliError::Core(hitchin_core::Error::Domain(_)) => "domain",
            CliError::Core(_) | CliError::Io(_) | CliError::Csv(_) => "output",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}
