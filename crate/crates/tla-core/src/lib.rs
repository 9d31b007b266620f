//! Shared domain types and on-disk formats for the leaf-area pipeline.
//!
//! This crate defines the data model every other pipeline crate builds on —
//! point clouds, triangle meshes, camera-pose sidecars, mesh features, and
//! dataset rows — plus the PLY/JSON/CSV codecs that move them on and off
//! disk. All geometry is generic over the scalar type via [`scalar::Real`];
//! `*F`/`*D` aliases at the crate root pin the common `f32`/`f64`
//! instantiations.

pub mod camera;
pub mod cloud;
pub mod csv_io;
pub mod dataset;
pub mod error;
pub mod math;
pub mod mesh;
pub mod ply;
pub mod scalar;

pub use camera::{read_camera_poses, write_camera_poses, CameraPoses};
pub use cloud::{PointCloud, Rgb};
pub use csv_io::{read_dataset_csv, write_dataset_csv, CSV_COLUMNS};
pub use dataset::{
    Cultivar, Dataset, Experiment, FeatureFlags, MeshFeatures, Sample, FEATURE_NAMES,
};
pub use error::{CoreError, Result};
pub use math::{eigen_sym3, Aabb, Mat3, Vec3};
pub use mesh::TriangleMesh;
pub use ply::{read_ply, write_ply, write_ply_cloud, write_ply_mesh, PlyData, PlyFloat};
pub use scalar::Real;

/// `f32` aliases.
pub type Vec3F = Vec3<f32>;
pub type Mat3F = Mat3<f32>;
pub type AabbF = Aabb<f32>;
pub type PointCloudF = PointCloud<f32>;
pub type TriangleMeshF = TriangleMesh<f32>;
pub type CameraPosesF = CameraPoses<f32>;
pub type MeshFeaturesF = MeshFeatures<f32>;

/// `f64` aliases (the pipeline default).
pub type Vec3D = Vec3<f64>;
pub type Mat3D = Mat3<f64>;
pub type AabbD = Aabb<f64>;
pub type PointCloudD = PointCloud<f64>;
pub type TriangleMeshD = TriangleMesh<f64>;
pub type CameraPosesD = CameraPoses<f64>;
pub type MeshFeaturesD = MeshFeatures<f64>;
