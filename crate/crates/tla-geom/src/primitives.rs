//! Small procedural meshes used by tests, examples, and the synthesizer.

use std::collections::HashMap;

use tla_core::math::Vec3;
use tla_core::{Real, TriangleMesh};

/// Axis-aligned unit cube `[0,1]³` as 12 outward-wound triangles.
pub fn unit_cube_mesh<T: Real>() -> TriangleMesh<T> {
    let z = T::zero();
    let o = T::one();
    let vertices = vec![
        Vec3::new(z, z, z), // 0
        Vec3::new(o, z, z), // 1
        Vec3::new(o, o, z), // 2
        Vec3::new(z, o, z), // 3
        Vec3::new(z, z, o), // 4
        Vec3::new(o, z, o), // 5
        Vec3::new(o, o, o), // 6
        Vec3::new(z, o, o), // 7
    ];
    let triangles = vec![
        // bottom (z = 0, normal -z)
        [0, 2, 1],
        [0, 3, 2],
        // top (z = 1, normal +z)
        [4, 5, 6],
        [4, 6, 7],
        // front (y = 0, normal -y)
        [0, 1, 5],
        [0, 5, 4],
        // back (y = 1, normal +y)
        [2, 3, 7],
        [2, 7, 6],
        // left (x = 0, normal -x)
        [0, 4, 7],
        [0, 7, 3],
        // right (x = 1, normal +x)
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriangleMesh::new(vertices, triangles)
}

/// Geodesic sphere: an icosahedron subdivided `subdivisions` times with all
/// vertices projected onto the sphere of the given radius, centered at the
/// origin. Outward winding.
pub fn icosphere<T: Real>(radius: T, subdivisions: usize) -> TriangleMesh<T> {
    let phi = T::of((1.0 + 5.0_f64.sqrt()) / 2.0);
    let one = T::one();
    let z = T::zero();
    let mut vertices: Vec<Vec3<T>> = vec![
        Vec3::new(-one, phi, z),
        Vec3::new(one, phi, z),
        Vec3::new(-one, -phi, z),
        Vec3::new(one, -phi, z),
        Vec3::new(z, -one, phi),
        Vec3::new(z, one, phi),
        Vec3::new(z, -one, -phi),
        Vec3::new(z, one, -phi),
        Vec3::new(phi, z, -one),
        Vec3::new(phi, z, one),
        Vec3::new(-phi, z, -one),
        Vec3::new(-phi, z, one),
    ];
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for t in &triangles {
            let mut mid = [0u32; 3];
            for (k, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                .into_iter()
                .enumerate()
            {
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a as usize] + vertices[b as usize]) * T::half();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                });
            }
            next.push([t[0], mid[0], mid[2]]);
            next.push([t[1], mid[1], mid[0]]);
            next.push([t[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        triangles = next;
    }

    for v in &mut vertices {
        let n = v.norm();
        if n > T::zero() {
            *v = *v * (radius / n);
        }
    }
    TriangleMesh::new(vertices, triangles)
}
