use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// Everything that ends a run. Validation problems exit with 1, failures
/// while executing a valid configuration with 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{key}: {reason}")]
    Schema { key: String, reason: String },
    #[error("{file}: {key}: {reason}")]
    Expression {
        file: PathBuf,
        key: String,
        code: &'static str,
        reason: String,
    },
    #[error("{0}")]
    Runtime(String),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    key: Option<&'a str>,
    message: String,
}

impl CliError {
    pub fn schema(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Schema {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io_error",
            CliError::Schema { .. } => "schema_error",
            CliError::Expression { code, .. } => code,
            CliError::Runtime(_) => "runtime_error",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema { .. } | CliError::Expression { .. } => 1,
            CliError::Io { .. } | CliError::Runtime(_) => 2,
        }
    }

    fn key(&self) -> Option<&str> {
        match self {
            CliError::Schema { key, .. } | CliError::Expression { key, .. } => Some(key),
            _ => None,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        let record = ErrorRecord {
            error: self.code(),
            key: self.key(),
            message: self.to_string(),
        };
        serde_json::to_string(&record).expect("error record serializes")
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    pistlab_core::AnalysisError,
    pistlab_core::DynamicsError,
    pistlab_core::GeometryError,
    pistlab_core::EvalError
);
