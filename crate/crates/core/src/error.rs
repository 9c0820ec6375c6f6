use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the clustering toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (qubit count, k, tolerances, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An API was called with arguments that violate its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// A feature value cannot be mapped to a quantum state.
    #[error("encoding error at index {index}: {reason}")]
    Encoding { index: usize, reason: String },

    /// Input data is malformed (non-finite entries, ragged rows, ...).
    #[error("data error: {0}")]
    Data(String),

    /// The catalog CSV is missing required columns or cannot be read.
    #[error("ingestion error: {0}")]
    Ingest(String),

    /// A clustering metric is undefined for the given partition.
    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An internal consistency check failed.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    ///
    /// Usage problems exit with 2, data and I/O problems with 3, internal
    /// invariant violations with 70.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 70,
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Encoding { .. }
            | Error::Data(_)
            | Error::Ingest(_)
            | Error::MetricUndefined(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => 3,
        }
    }
}
