//! Error type shared by the geometry pipeline stages.

use thiserror::Error;

/// Errors produced by refinement, reconstruction, and feature extraction.
#[derive(Debug, Error)]
pub enum GeomError {
    /// Too few points (or too-degenerate points) for the requested operation.
    #[error("insufficient input: {0}")]
    InsufficientPoints(String),

    /// Geometric degeneracy that cannot be resolved (collinear circle fit,
    /// coplanar Delaunay input after jitter retries, ...).
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// The camera sidecar required by an operation is absent or empty.
    #[error("missing reference: {0}")]
    MissingReference(String),

    /// Cropping produced an empty cloud (wrong frame or side factor).
    #[error("empty crop: {0}")]
    EmptyCrop(String),

    /// The operation requires per-point normals.
    #[error("missing normals: {0}")]
    MissingNormals(String),

    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// An iterative solver failed to reach its tolerance.
    #[error("solver failure: {0}")]
    Solver(String),

    /// Error bubbled up from core I/O or validation.
    #[error(transparent)]
    Core(#[from] tla_core::CoreError),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
