//! Uniform-grid spatial index for fixed-radius and k-nearest-neighbor
//! queries over point sets.
//!
//! A hash grid with cell size tied to the query radius (or an estimate of
//! point spacing) gives linear-time construction and near-constant-time
//! queries on the roughly uniform clouds this pipeline sees, and — unlike
//! tree structures with tie-dependent traversal order — makes it easy to
//! return results in a deterministic order.

use std::collections::HashMap;

use tla_core::math::Vec3;
use tla_core::Real;

/// Uniform hash-grid over a point set.
pub struct PointGrid<'a, T> {
    points: &'a [Vec3<T>],
    cell: T,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
}

fn cell_key<T: Real>(p: Vec3<T>, cell: T) -> (i64, i64, i64) {
    let f = |v: T| (v / cell).floor().as_f64() as i64;
    (f(p.x), f(p.y), f(p.z))
}

impl<'a, T: Real> PointGrid<'a, T> {
    /// Builds a grid with the given cell size (must be positive and finite).
    pub fn build(points: &'a [Vec3<T>], cell: T) -> Self {
        let cell = if cell > T::zero() && cell.is_finite() {
            cell
        } else {
            T::one()
        };
        let mut cells: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            cells.entry(cell_key(p, cell)).or_default().push(i as u32);
        }
        PointGrid {
            points,
            cell,
            cells,
        }
    }

    /// Builds a grid sized for radius queries of roughly `radius`.
    pub fn for_radius(points: &'a [Vec3<T>], radius: T) -> Self {
        Self::build(points, radius)
    }

    /// Indices of all points within `radius` of `q` (inclusive), sorted
    /// ascending. Includes the query point itself when it is in the set.
    pub fn within_radius(&self, q: Vec3<T>, radius: T) -> Vec<u32> {
        let r_sq = radius * radius;
        let reach = (radius / self.cell).ceil().as_f64() as i64;
        let (cx, cy, cz) = cell_key(q, self.cell);
        let mut out = Vec::new();
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &i in bucket {
                            if (self.points[i as usize] - q).norm_sq() <= r_sq {
                                out.push(i);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Indices of the `k` nearest points to `q` (the query point itself
    /// counts when present in the set). Ties break on the lower index.
    /// Returns fewer than `k` only when the set is smaller than `k`.
    pub fn k_nearest(&self, q: Vec3<T>, k: usize) -> Vec<u32> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let k = k.min(self.points.len());
        // Expand shells of cells around the query until the k-th best
        // distance is safely inside the searched region.
        let (cx, cy, cz) = cell_key(q, self.cell);
        let mut best: Vec<(T, u32)> = Vec::with_capacity(k + 8);
        let mut ring = 0i64;
        loop {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        // Only the outermost shell of this ring is new.
                        if dx.abs() != ring && dy.abs() != ring && dz.abs() != ring {
                            continue;
                        }
                        if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                            for &i in bucket {
                                let d = (self.points[i as usize] - q).norm_sq();
                                best.push((d, i));
                            }
                        }
                    }
                }
            }
            if best.len() >= k {
                best.sort_unstable_by(|a, b| {
                    a.0.partial_cmp(&b.0)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.1.cmp(&b.1))
                });
                best.truncate(k);
                // Any unscanned point sits in a cell at Chebyshev ring
                // distance > ring, hence at Euclidean distance ≥ ring·cell;
                // once the k-th best is inside that bound it is final.
                let kth = best[k - 1].0.sqrt();
                let safe = T::of_usize(ring as usize) * self.cell;
                if kth <= safe || ring as usize > self.hard_ring_cap() {
                    best.truncate(k);
                    return best.into_iter().map(|(_, i)| i).collect();
                }
            }
            ring += 1;
            if ring as usize > self.hard_ring_cap() {
                // Degenerate spread; fall back to exhaustive scan.
                let mut all: Vec<(T, u32)> = self
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| ((p - q).norm_sq(), i as u32))
                    .collect();
                all.sort_unstable_by(|a, b| {
                    a.0.partial_cmp(&b.0)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.1.cmp(&b.1))
                });
                all.truncate(k);
                return all.into_iter().map(|(_, i)| i).collect();
            }
        }
    }

    fn hard_ring_cap(&self) -> usize {
        // Beyond ~64 rings the grid is mis-sized for the data; exhaustive
        // search is cheaper than scanning 129³ cells.
        64
    }
}

/// Picks a grid cell size from the bounding box and point count so that an
/// average cell holds O(1) points: diag / cbrt(n).
pub fn default_cell_size<T: Real>(points: &[Vec3<T>]) -> T {
    use tla_core::math::Aabb;
    let n = points.len().max(1);
    match Aabb::from_points(points.iter().copied()) {
        Some(bb) => {
            let diag = bb.diagonal();
            if diag > T::zero() {
                diag / T::of((n as f64).cbrt().max(1.0))
            } else {
                T::one()
            }
        }
        None => T::one(),
    }
}
