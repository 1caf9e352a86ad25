//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset handling, geometry, training and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("cardinality mismatch: {0}")]
    Cardinality(String),

    #[error("provenance error: {0}")]
    Provenance(String),

    #[error("degenerate segment: {0}")]
    DegenerateSegment(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient poses: {0}")]
    InsufficientPoses(String),

    #[error("invalid cluster count: {0}")]
    InvalidClusterCount(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("label out of range: {0}")]
    Label(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("numeric failure: {0}")]
    Numerics(String),

    #[error("stage violation: {0}")]
    StageViolation(String),

    #[error("placement failed: {0}")]
    Placement(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error in {path}: {msg}")]
    Format { path: String, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Exit code class for the CLI: 1 config, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Numerics(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn format(path: &std::path::Path, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.display().to_string(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
