//! Indexed triangle meshes.

use std::collections::HashMap;

use crate::error::{CoreError, Result};
use crate::math::{Aabb, Vec3};
use crate::scalar::Real;

/// An indexed triangle mesh. Vertex coordinates are in centimeters once the
/// pipeline has scaled the scene.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh<T> {
    pub vertices: Vec<Vec3<T>>,
    /// Vertex-index triples; counter-clockwise orientation encodes the
    /// outward side where the producer guarantees one.
    pub triangles: Vec<[u32; 3]>,
}

impl<T: Real> TriangleMesh<T> {
    pub fn new(vertices: Vec<Vec3<T>>, triangles: Vec<[u32; 3]>) -> Self {
        Self {
            vertices,
            triangles,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.triangles.is_empty()
    }

    pub fn bbox(&self) -> Option<Aabb<T>> {
        Aabb::from_points(self.vertices.iter().copied())
    }

    /// Checks that all indices are in range and no triangle repeats a vertex.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (t, tri) in self.triangles.iter().enumerate() {
            for &i in tri {
                if i >= n {
                    return Err(CoreError::Invariant(format!(
                        "triangle {t} references vertex {i} but only {n} vertices exist"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(CoreError::Invariant(format!(
                    "triangle {t} is degenerate: {tri:?}"
                )));
            }
        }
        Ok(())
    }

    /// Merges vertices closer than `tolerance` and drops triangles that
    /// become degenerate. Unreferenced vertices are removed as well.
    ///
    /// Merging is grid-hash based and deterministic: the representative of a
    /// merged group is the lowest-index member encountered in vertex order.
    pub fn weld(&self, tolerance: T) -> Self {
        if self.vertices.is_empty() {
            return Self::empty();
        }
        let tol = tolerance.max(T::zero());
        let remap: Vec<u32> = if tol > T::zero() {
            let cell = tol;
            let key = |p: Vec3<T>| -> (i64, i64, i64) {
                (
                    (p.x / cell).floor().as_f64() as i64,
                    (p.y / cell).floor().as_f64() as i64,
                    (p.z / cell).floor().as_f64() as i64,
                )
            };
            let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
            let mut remap = vec![u32::MAX; self.vertices.len()];
            let tol_sq = tol * tol;
            for (i, &p) in self.vertices.iter().enumerate() {
                let (kx, ky, kz) = key(p);
                let mut found = None;
                'search: for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(cands) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                                for &c in cands {
                                    if (self.vertices[c as usize] - p).norm_sq() <= tol_sq {
                                        found = Some(remap[c as usize]);
                                        break 'search;
                                    }
                                }
                            }
                        }
                    }
                }
                match found {
                    Some(canon) => remap[i] = canon,
                    None => {
                        remap[i] = i as u32;
                        grid.entry((kx, ky, kz)).or_default().push(i as u32);
                    }
                }
            }
            remap
        } else {
            (0..self.vertices.len() as u32).collect()
        };

        // Compact, preserving the original vertex order: keep canonical
        // vertices that are referenced by a triangle (or, for point-set
        // meshes without triangles, every canonical vertex).
        let mut keep = vec![false; self.vertices.len()];
        if self.triangles.is_empty() {
            for (i, k) in keep.iter_mut().enumerate() {
                *k = remap[i] == i as u32;
            }
        } else {
            for tri in &self.triangles {
                for &v in tri {
                    keep[remap[v as usize] as usize] = true;
                }
            }
        }
        let mut new_index = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_index[i] = vertices.len() as u32;
                vertices.push(self.vertices[i]);
            }
        }
        let mut triangles = Vec::with_capacity(self.triangles.len());
        for tri in &self.triangles {
            let a = new_index[remap[tri[0] as usize] as usize];
            let b = new_index[remap[tri[1] as usize] as usize];
            let c = new_index[remap[tri[2] as usize] as usize];
            if a != b && b != c && a != c {
                triangles.push([a, b, c]);
            }
        }
        Self {
            vertices,
            triangles,
        }
    }

    /// Default on-disk welding tolerance: 1e-6 × bounding-box diagonal.
    pub fn default_weld_tolerance(&self) -> T {
        self.bbox()
            .map(|b| b.diagonal() * T::of(1e-6))
            .unwrap_or_else(T::zero)
    }

    /// Positions of a triangle's three corners.
    #[inline]
    pub fn triangle_points(&self, t: usize) -> [Vec3<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Reverses the winding of every triangle.
    pub fn flip_orientation(&mut self) {
        for tri in &mut self.triangles {
            tri.swap(1, 2);
        }
    }
}
