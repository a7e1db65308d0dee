use std::path::Path;

use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("dataset not found: {0}")]
    DatasetNotFound(String),
    #[error("config not found: {0}")]
    ConfigNotFound(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid data in {path}: {message}")]
    InvalidData { path: String, message: String },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] svarma_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn invalid_data(path: &Path, message: impl Into<String>) -> Self {
        CliError::InvalidData { path: path.display().to_string(), message: message.into() }
    }

    /// Stable machine-readable error kind.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::DatasetNotFound(_) => "dataset_not_found",
            CliError::ConfigNotFound(_) => "config_not_found",
            CliError::InvalidConfig(_) => "invalid_config",
            CliError::InvalidData { .. } => "invalid_data",
            CliError::Missing(_) => "missing_argument",
            CliError::Io { .. } => "io_error",
            CliError::Core(_) => "model_error",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.code(), "message": self.to_string() });
        match self {
            CliError::DatasetNotFound(p) | CliError::ConfigNotFound(p) => v["path"] = json!(p),
            CliError::InvalidData { path, .. } | CliError::Io { path, .. } => v["path"] = json!(path),
            _ => {}
        }
        v
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
