//! Error types for the I/O layer.

use thiserror::Error;

/// Errors produced while parsing or validating on-disk artifacts.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Malformed PLY header or body; carries the 1-based line number for
    /// ASCII input (header lines also count for binary input).
    #[error("PLY parse error at line {line}: {msg}")]
    PlyParse { line: usize, msg: String },

    /// Declared element counts exceed the available data.
    #[error("PLY truncated: {0}")]
    PlyTruncated(String),

    /// Valid PLY, but a feature this reader does not support (e.g. big-endian).
    #[error("unsupported PLY format: {0}")]
    PlyUnsupported(String),

    /// Camera sidecar JSON does not match the `{"positions": [[x,y,z],...]}` schema.
    #[error("camera sidecar schema error: {0}")]
    CameraSchema(String),

    /// Dataset CSV violates the schema or a dataset invariant.
    #[error("dataset validation error: {0}")]
    DatasetInvalid(String),

    /// A domain-type invariant does not hold.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
