//! From-scratch learning kernels for the TLA pipeline: standardization,
//! mutual information, Boruta feature selection, seven regressors, metrics,
//! and exact t-SNE.
//!
//! Everything is generic over [`tla_core::Real`] (`f32`/`f64`).

pub mod boruta;
pub mod error;
pub mod gbt;
pub mod linear;
pub mod matrix;
pub mod metrics;
pub mod mi;
pub mod mlp;
pub mod model;
pub mod rng;
pub mod standard;
pub mod tree;
pub mod tsne;

pub use error::{MlError, Result};
pub use matrix::FeatureMatrix;
pub use metrics::{bias, evaluate, mae, r2, EvalMetrics};
pub use mi::mutual_information;
pub use model::{fit_model, sample_spec, search_space, validate_spec, HyperValue, ModelKind, ModelSpec, ParamSpace, TrainedModel};
pub use standard::Standardizer;

/// `f64` feature matrix (the pipeline default).
pub type FeatureMatrixD = FeatureMatrix<f64>;
/// `f32` feature matrix.
pub type FeatureMatrixF = FeatureMatrix<f32>;
