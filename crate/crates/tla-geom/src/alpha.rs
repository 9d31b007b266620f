//! Alpha-shape surface extraction on top of the Delaunay tetrahedralization.
//!
//! A tetrahedron survives when its circumradius is at most `alpha`; the shape
//! is the boundary of the surviving union — every face incident to exactly
//! one kept tetrahedron, oriented outward.

use std::collections::HashMap;

use tla_core::math::Vec3;
use tla_core::{Real, TriangleMesh};

use crate::delaunay::{circumsphere, delaunay3d};
use crate::error::{GeomError, Result};

/// Face `k` of tet `[v0,v1,v2,v3]` is opposite vertex `k`, ordered outward.
/// (Kept in sync with the Delaunay builder's convention.)
const FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

/// Computes the alpha shape of `points` directly (triangulating internally).
///
/// When the same cloud is probed at several alpha values, triangulate once
/// with [`delaunay3d`] and call [`alpha_shape_from_tets`] per value instead.
pub fn alpha_shape<T: Real>(points: &[Vec3<T>], alpha: T) -> Result<TriangleMesh<T>> {
    let tets = delaunay3d(points)?;
    alpha_shape_from_tets(points, &tets, alpha)
}

/// Alpha shape from a precomputed Delaunay tetrahedralization of `points`.
///
/// Returns an empty mesh when no tetrahedron has circumradius ≤ `alpha`.
pub fn alpha_shape_from_tets<T: Real>(
    points: &[Vec3<T>],
    tets: &[[u32; 4]],
    alpha: T,
) -> Result<TriangleMesh<T>> {
    if !(alpha > T::zero()) {
        return Err(GeomError::InvalidParam(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let kept: Vec<&[u32; 4]> = tets
        .iter()
        .filter(|t| {
            circumsphere(
                points[t[0] as usize],
                points[t[1] as usize],
                points[t[2] as usize],
                points[t[3] as usize],
            )
            .map(|(_, r)| r <= alpha)
            .unwrap_or(false)
        })
        .collect();

    // Count how many kept tets share each face; boundary faces appear once.
    let mut face_count: HashMap<[u32; 3], u32> = HashMap::new();
    for t in &kept {
        for f in FACES {
            let mut key = [t[f[0]], t[f[1]], t[f[2]]];
            key.sort_unstable();
            *face_count.entry(key).or_insert(0) += 1;
        }
    }

    // Emit boundary faces in the kept tets' outward orientation, in
    // deterministic (tet, face) order.
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    for t in &kept {
        for f in FACES {
            let face = [t[f[0]], t[f[1]], t[f[2]]];
            let mut key = face;
            key.sort_unstable();
            if face_count[&key] == 1 {
                triangles.push(face);
            }
        }
    }

    // Compact to the referenced vertices, preserving ascending input order.
    let mut used: Vec<u32> = triangles.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let mut remap: HashMap<u32, u32> = HashMap::with_capacity(used.len());
    let mut vertices = Vec::with_capacity(used.len());
    for (new, &old) in used.iter().enumerate() {
        remap.insert(old, new as u32);
        vertices.push(points[old as usize]);
    }
    for tri in &mut triangles {
        for v in tri.iter_mut() {
            *v = remap[v];
        }
    }
    Ok(TriangleMesh::new(vertices, triangles))
}
