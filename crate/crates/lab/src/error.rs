use std::path::PathBuf;

use thiserror::Error;

/// Failures of the lab layer, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] phasestep_core::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type LabResult<T> = Result<T, LabError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            LabError::Io { .. } => EXIT_FAILURE,
            _ => EXIT_VALIDATION,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}
