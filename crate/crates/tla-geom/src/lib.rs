//! Geometry stages of the TLA pipeline: point-cloud refinement, surface
//! reconstruction (alpha shape, marching cubes, grid Poisson, ball
//! pivoting), and mesh feature extraction.
//!
//! All algorithms are generic over the scalar type via [`tla_core::Real`];
//! concrete `f32`/`f64` aliases live at the crate root.

pub mod alpha;
pub mod bpa;
pub mod delaunay;
pub mod error;
pub mod features;
pub mod grid;
pub mod mc;
pub mod normals;
pub mod poisson;
pub mod primitives;
pub mod refine;
pub mod spatial;

pub use error::{GeomError, Result};
pub use normals::estimate_normals;
