//! Point clouds: positions with optional per-point color and normal.

use crate::error::{CoreError, Result};
use crate::math::{Aabb, Vec3};
use crate::scalar::Real;

/// 8-bit RGB color.
pub type Rgb = [u8; 3];

/// A 3D point cloud. Coordinates are in scene units — centimeters after the
/// refinement stage has scaled the cloud, arbitrary before that.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud<T> {
    pub points: Vec<Vec3<T>>,
    /// Per-point RGB; when present, same length as `points`.
    pub colors: Option<Vec<Rgb>>,
    /// Per-point unit normals; when present, same length as `points`.
    pub normals: Option<Vec<Vec3<T>>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Self {
        Self {
            points,
            colors: None,
            normals: None,
        }
    }

    pub fn with_colors(points: Vec<Vec3<T>>, colors: Vec<Rgb>) -> Result<Self> {
        let cloud = Self {
            points,
            colors: Some(colors),
            normals: None,
        };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Bounding box; `None` for an empty cloud.
    pub fn bbox(&self) -> Option<Aabb<T>> {
        Aabb::from_points(self.points.iter().copied())
    }

    /// Checks the structural invariants: attribute lengths match and normals
    /// are unit length within 1e-6.
    pub fn validate(&self) -> Result<()> {
        if let Some(colors) = &self.colors {
            if colors.len() != self.points.len() {
                return Err(CoreError::Invariant(format!(
                    "colors length {} != points length {}",
                    colors.len(),
                    self.points.len()
                )));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != self.points.len() {
                return Err(CoreError::Invariant(format!(
                    "normals length {} != points length {}",
                    normals.len(),
                    self.points.len()
                )));
            }
            let tol = T::of(1e-6);
            for (i, n) in normals.iter().enumerate() {
                if (n.norm() - T::one()).abs() > tol {
                    return Err(CoreError::Invariant(format!(
                        "normal {} has norm {} (must be 1 within 1e-6)",
                        i,
                        n.norm()
                    )));
                }
            }
        }
        Ok(())
    }

    /// New cloud containing only the points at `indices`, carrying colors and
    /// normals along.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            normals: self
                .normals
                .as_ref()
                .map(|n| indices.iter().map(|&i| n[i]).collect()),
        }
    }

    /// Retains the points whose index satisfies `keep`, like `select` but
    /// predicate-driven.
    pub fn filter_by_index(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let indices: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        self.select(&indices)
    }

    /// Arithmetic mean of the points; `None` when empty.
    pub fn centroid(&self) -> Option<Vec3<T>> {
        if self.is_empty() {
            return None;
        }
        let sum = self
            .points
            .iter()
            .fold(Vec3::zero(), |acc, &p| acc + p);
        Some(sum / T::of_usize(self.len()))
    }
}
