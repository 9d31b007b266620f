//! Scalar fields on a regular voxel grid, plus density splatting.

use tla_core::math::{Aabb, Vec3};
use tla_core::{PointCloud, Real};

use crate::error::{GeomError, Result};

/// A scalar field sampled at the centers of a regular, isotropic voxel grid.
#[derive(Debug, Clone)]
pub struct DensityGrid<T> {
    /// Number of samples along x, y, z.
    pub dims: [usize; 3],
    /// World position of sample (0, 0, 0).
    pub origin: Vec3<T>,
    /// Spacing between adjacent samples (same on every axis).
    pub cell: T,
    /// Sample values, x fastest: `index = (z * dims[1] + y) * dims[0] + x`.
    pub values: Vec<T>,
}

impl<T: Real> DensityGrid<T> {
    pub fn new(origin: Vec3<T>, cell: T, dims: [usize; 3]) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(GeomError::InvalidParam(format!(
                "grid dims must be at least 2 per axis, got {dims:?}"
            )));
        }
        if !(cell > T::zero()) {
            return Err(GeomError::InvalidParam(format!(
                "grid cell size must be positive, got {cell}"
            )));
        }
        Ok(Self {
            dims,
            origin,
            cell,
            values: vec![T::zero(); dims[0] * dims[1] * dims[2]],
        })
    }

    /// Builds a grid by evaluating `f` at every sample position.
    pub fn from_fn(
        origin: Vec3<T>,
        cell: T,
        dims: [usize; 3],
        mut f: impl FnMut(Vec3<T>) -> T,
    ) -> Result<Self> {
        let mut grid = Self::new(origin, cell, dims)?;
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let p = grid.position(x, y, z);
                    let i = grid.index(x, y, z);
                    grid.values[i] = f(p);
                }
            }
        }
        Ok(grid)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize, z: usize) -> T {
        self.values[self.index(x, y, z)]
    }

    /// World position of sample (x, y, z).
    #[inline]
    pub fn position(&self, x: usize, y: usize, z: usize) -> Vec3<T> {
        self.origin
            + Vec3::new(
                T::of_usize(x) * self.cell,
                T::of_usize(y) * self.cell,
                T::of_usize(z) * self.cell,
            )
    }

    pub fn total_mass(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn max_value(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::neg_infinity(), |a, b| if b > a { b } else { a })
    }
}

/// Distributes each point's unit weight trilinearly onto the 8 surrounding
/// grid samples. The grid covers the cloud's bounding box with `resolution`
/// samples along the longest axis, plus `padding` empty boundary cells on
/// every side so that isosurfaces of the density can close.
pub fn splat_density<T: Real>(
    cloud: &PointCloud<T>,
    resolution: usize,
    padding: usize,
) -> Result<DensityGrid<T>> {
    if cloud.is_empty() {
        return Err(GeomError::InsufficientPoints(
            "cannot splat an empty cloud".into(),
        ));
    }
    if resolution < 2 {
        return Err(GeomError::InvalidParam(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    let padding = padding.max(1);
    let bb = Aabb::from_points(cloud.points.iter().copied()).expect("non-empty");
    let ext = bb.extent();
    let max_extent = ext.x.max(ext.y).max(ext.z);
    let cell = if max_extent > T::zero() {
        max_extent / T::of_usize(resolution - 1)
    } else {
        T::one()
    };
    let dim_of = |e: T| -> usize {
        let inner = (e / cell).as_f64().ceil() as usize;
        inner + 1 + 2 * padding
    };
    let dims = [dim_of(ext.x), dim_of(ext.y), dim_of(ext.z)];
    let origin = bb.min - Vec3::new(cell, cell, cell) * T::of_usize(padding);

    let mut grid = DensityGrid::new(origin, cell, dims)?;
    for &p in &cloud.points {
        let g = (p - origin) / cell;
        // With padding ≥ 1 every point fits strictly inside the sample
        // lattice; clamp defensively against float edge effects.
        let ix = (g.x.as_f64().floor() as usize).min(dims[0] - 2);
        let iy = (g.y.as_f64().floor() as usize).min(dims[1] - 2);
        let iz = (g.z.as_f64().floor() as usize).min(dims[2] - 2);
        let fx = g.x - T::of_usize(ix);
        let fy = g.y - T::of_usize(iy);
        let fz = g.z - T::of_usize(iz);
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let wx = if dx == 0 { T::one() - fx } else { fx };
                    let wy = if dy == 0 { T::one() - fy } else { fy };
                    let wz = if dz == 0 { T::one() - fz } else { fz };
                    let i = grid.index(ix + dx, iy + dy, iz + dz);
                    grid.values[i] += wx * wy * wz;
                }
            }
        }
    }
    Ok(grid)
}
