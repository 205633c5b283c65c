use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Input file does not conform to its documented schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Inconsistent or unsatisfiable configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller asked for something the inputs cannot support (e.g. predcls without GT).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("ontology hash mismatch: checkpoint {expected}, ontology {found}")]
    OntologyMismatch { expected: String, found: String },

    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged { epoch: usize, reason: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors the CLI reports with the usage exit code.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_))
    }
}
