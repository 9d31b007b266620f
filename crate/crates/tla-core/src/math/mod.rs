//! Small dense-math toolbox: 3-vectors, 3×3 matrices (with symmetric eigen
//! decomposition), and axis-aligned boxes.

mod aabb;
mod mat3;
mod vec3;

pub use aabb::Aabb;
pub use mat3::{eigen_sym3, Mat3};
pub use vec3::Vec3;
