//! Indicator-function ("Poisson") surface reconstruction on a regular grid.
//!
//! The oriented normal field is rasterized onto staggered (face-centered)
//! grids, the indicator χ solves ∇·∇χ = ∇·V with homogeneous Dirichlet
//! boundaries via conjugate gradients, and the surface is the isosurface of
//! χ at its mean value over the input samples. Because the isovalue is read
//! from the solved field, the arbitrary scaling of the splatted normals
//! cancels out.

use tla_core::math::{Aabb, Vec3};
use tla_core::{PointCloud, Real, TriangleMesh};

use crate::error::{GeomError, Result};
use crate::grid::DensityGrid;
use crate::mc::marching_cubes_field;

#[derive(Debug, Clone)]
pub struct PoissonParams<T> {
    /// Hard cap on grid samples per axis; depth asks for 2^depth.
    pub grid_cap: usize,
    /// Conjugate-gradient relative residual target.
    pub cg_tol: T,
    /// Conjugate-gradient iteration budget.
    pub cg_max_iter: usize,
    /// Empty boundary cells added around the cloud on every side.
    pub padding: usize,
}

impl<T: Real> Default for PoissonParams<T> {
    fn default() -> Self {
        Self {
            grid_cap: 256,
            cg_tol: T::of(1e-6),
            cg_max_iter: 5000,
            padding: 3,
        }
    }
}

pub const POISSON_DEPTH_MIN: usize = 8;
pub const POISSON_DEPTH_MAX: usize = 15;

struct FaceField<T> {
    /// Per-axis face arrays; `v[axis]` has `dims` shrunk by one on `axis`.
    v: [Vec<T>; 3],
    fdims: [[usize; 3]; 3],
}

impl<T: Real> FaceField<T> {
    fn new(dims: [usize; 3]) -> Self {
        let fd = |axis: usize| {
            let mut d = dims;
            d[axis] -= 1;
            d
        };
        let fdims = [fd(0), fd(1), fd(2)];
        let v = [
            vec![T::zero(); fdims[0][0] * fdims[0][1] * fdims[0][2]],
            vec![T::zero(); fdims[1][0] * fdims[1][1] * fdims[1][2]],
            vec![T::zero(); fdims[2][0] * fdims[2][1] * fdims[2][2]],
        ];
        Self { v, fdims }
    }

    #[inline]
    fn index(&self, axis: usize, x: usize, y: usize, z: usize) -> usize {
        let d = self.fdims[axis];
        (z * d[1] + y) * d[0] + x
    }

    #[inline]
    fn get(&self, axis: usize, x: isize, y: isize, z: isize) -> T {
        let d = self.fdims[axis];
        if x < 0 || y < 0 || z < 0 || x as usize >= d[0] || y as usize >= d[1] || z as usize >= d[2]
        {
            T::zero()
        } else {
            self.v[axis][self.index(axis, x as usize, y as usize, z as usize)]
        }
    }

    /// Trilinearly splats `weight` onto the `axis` face lattice around the
    /// grid-space position `g` (sample coordinates of the χ lattice).
    fn splat(&mut self, axis: usize, g: Vec3<T>, weight: T) {
        let half = T::half();
        let mut gx = [g.x, g.y, g.z];
        gx[axis] -= half; // face centers sit half a cell along `axis`
        let d = self.fdims[axis];
        let clamp_floor = |v: T, hi: usize| -> usize {
            let f = v.as_f64().floor();
            if f < 0.0 {
                0
            } else {
                (f as usize).min(hi.saturating_sub(2))
            }
        };
        let ix = clamp_floor(gx[0], d[0]);
        let iy = clamp_floor(gx[1], d[1]);
        let iz = clamp_floor(gx[2], d[2]);
        let fx = (gx[0] - T::of_usize(ix)).max(T::zero()).min(T::one());
        let fy = (gx[1] - T::of_usize(iy)).max(T::zero()).min(T::one());
        let fz = (gx[2] - T::of_usize(iz)).max(T::zero()).min(T::one());
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let wx = if dx == 0 { T::one() - fx } else { fx };
                    let wy = if dy == 0 { T::one() - fy } else { fy };
                    let wz = if dz == 0 { T::one() - fz } else { fz };
                    let i = self.index(axis, ix + dx, iy + dy, iz + dz);
                    self.v[axis][i] += weight * wx * wy * wz;
                }
            }
        }
    }
}

/// Applies the (negated) 7-point Laplacian with Dirichlet boundaries.
fn apply_stencil<T: Real>(dims: [usize; 3], x: &[T], out: &mut [T]) {
    let [nx, ny, nz] = dims;
    let idx = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
    let six = T::of(6.0);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = x[idx(i, j, k)];
                let mut acc = six * c;
                if i > 0 {
                    acc -= x[idx(i - 1, j, k)];
                }
                if i + 1 < nx {
                    acc -= x[idx(i + 1, j, k)];
                }
                if j > 0 {
                    acc -= x[idx(i, j - 1, k)];
                }
                if j + 1 < ny {
                    acc -= x[idx(i, j + 1, k)];
                }
                if k > 0 {
                    acc -= x[idx(i, j, k - 1)];
                }
                if k + 1 < nz {
                    acc -= x[idx(i, j, k + 1)];
                }
                out[idx(i, j, k)] = acc;
            }
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Conjugate gradients for the SPD stencil system; returns (solution,
/// achieved relative residual, iterations).
fn conjugate_gradient<T: Real>(
    dims: [usize; 3],
    b: &[T],
    tol: T,
    max_iter: usize,
) -> (Vec<T>, T, usize) {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if !(b_norm > T::zero()) {
        return (vec![T::zero(); n], T::zero(), 0);
    }
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut p = b.to_vec();
    let mut ap = vec![T::zero(); n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        apply_stencil(dims, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break; // numerically exhausted
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * b_norm {
            return (x, rr_new.sqrt() / b_norm, iterations);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    (x, rr.sqrt() / b_norm, iterations)
}

/// Reconstructs a surface from an oriented point cloud.
///
/// `depth` follows the conventional octree nomenclature: the grid asks for
/// 2^depth samples along the longest axis, clamped to `params.grid_cap`.
pub fn poisson_reconstruct<T: Real>(
    cloud: &PointCloud<T>,
    depth: usize,
    params: &PoissonParams<T>,
) -> Result<TriangleMesh<T>> {
    if !(POISSON_DEPTH_MIN..=POISSON_DEPTH_MAX).contains(&depth) {
        return Err(GeomError::InvalidParam(format!(
            "poisson depth must be in [{POISSON_DEPTH_MIN}, {POISSON_DEPTH_MAX}], got {depth}"
        )));
    }
    let normals = cloud.normals.as_ref().ok_or_else(|| {
        GeomError::MissingNormals("poisson reconstruction needs oriented normals".into())
    })?;
    if cloud.is_empty() {
        return Err(GeomError::InsufficientPoints(
            "cannot reconstruct an empty cloud".into(),
        ));
    }

    // χ lattice covering the cloud plus padding (same layout as splatting).
    let resolution = (1usize << depth).min(params.grid_cap).max(2);
    let padding = params.padding.max(2);
    let bb = Aabb::from_points(cloud.points.iter().copied()).expect("non-empty");
    let ext = bb.extent();
    let max_extent = ext.x.max(ext.y).max(ext.z);
    let cell = if max_extent > T::zero() {
        max_extent / T::of_usize(resolution - 1)
    } else {
        T::one()
    };
    let dim_of = |e: T| (e / cell).as_f64().ceil() as usize + 1 + 2 * padding;
    let dims = [dim_of(ext.x), dim_of(ext.y), dim_of(ext.z)];
    let origin = bb.min - Vec3::new(cell, cell, cell) * T::of_usize(padding);

    // Rasterize the normal field onto staggered faces.
    let mut field = FaceField::new(dims);
    for (p, n) in cloud.points.iter().zip(normals) {
        let g = (*p - origin) / cell;
        field.splat(0, g, n.x);
        field.splat(1, g, n.y);
        field.splat(2, g, n.z);
    }

    // b = −div V  (the 1/h factors cancel into χ's arbitrary scale).
    let [nx, ny, nz] = dims;
    let mut b = vec![T::zero(); nx * ny * nz];
    let idx = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let (ii, jj, kk) = (i as isize, j as isize, k as isize);
                let div = (field.get(0, ii, jj, kk) - field.get(0, ii - 1, jj, kk))
                    + (field.get(1, ii, jj, kk) - field.get(1, ii, jj - 1, kk))
                    + (field.get(2, ii, jj, kk) - field.get(2, ii, jj, kk - 1));
                b[idx(i, j, k)] = -div;
            }
        }
    }

    let (chi, residual, iterations) =
        conjugate_gradient(dims, &b, params.cg_tol, params.cg_max_iter);
    if residual > params.cg_tol {
        return Err(GeomError::Solver(format!(
            "conjugate gradients stalled at relative residual {} after {} iterations",
            residual.as_f64(),
            iterations
        )));
    }

    let mut grid = DensityGrid::new(origin, cell, dims)?;
    grid.values = chi;

    // Isovalue: mean χ trilinearly sampled at the input points.
    let mut iso_sum = T::zero();
    for p in &cloud.points {
        let g = (*p - origin) / cell;
        let cf = |v: T, hi: usize| -> (usize, T) {
            let f = v.as_f64().floor().max(0.0) as usize;
            let f = f.min(hi - 2);
            (f, (v - T::of_usize(f)).max(T::zero()).min(T::one()))
        };
        let (ix, fx) = cf(g.x, nx);
        let (iy, fy) = cf(g.y, ny);
        let (iz, fz) = cf(g.z, nz);
        let mut val = T::zero();
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let wx = if dx == 0 { T::one() - fx } else { fx };
                    let wy = if dy == 0 { T::one() - fy } else { fy };
                    let wz = if dz == 0 { T::one() - fz } else { fz };
                    val += grid.value(ix + dx, iy + dy, iz + dz) * wx * wy * wz;
                }
            }
        }
        iso_sum += val;
    }
    let iso = iso_sum / T::of_usize(cloud.len());

    Ok(marching_cubes_field(&grid, iso))
}
