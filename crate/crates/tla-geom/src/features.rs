//! Morphological feature extraction from triangle meshes.
//!
//! Produces the nine-dimensional descriptor used by the regression stage:
//! height, plan-view length/width (oriented minimum rectangle by default),
//! aspect ratio, enclosed volume, surface area, plan bounding-rectangle area,
//! and bounding-box volume, plus the connected-component count.

use std::collections::HashMap;

use tla_core::math::Vec3;
use tla_core::{Real, TriangleMesh};

/// Scalar shape descriptors for one mesh.
///
/// All lengths are in the units of the mesh coordinates (centimeters in the
/// pipeline); areas and volumes in the corresponding squared/cubed units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshFeatures<T> {
    /// Extent along +Z.
    pub height: T,
    /// Longer side of the plan-view (XY) minimum-area rectangle.
    pub length: T,
    /// Shorter side of the plan-view rectangle. `length >= width`.
    pub width: T,
    /// `length / width`, or `0` when `width == 0` (see [`MeshFeatures::degenerate_aspect`]).
    pub aspect_ratio: T,
    /// Magnitude of the signed enclosed volume (divergence theorem).
    pub volume: T,
    /// Sum of triangle areas.
    pub surface_area: T,
    /// Area of the plan-view rectangle.
    pub bbox_area: T,
    /// `bbox_area * height`.
    pub bbox_volume: T,
    /// Number of edge/vertex-connected triangle components.
    pub n_components: usize,
    /// Set when `volume` was computed from a mesh that is not watertight and
    /// is therefore only a quasi-volume.
    pub quasi_volume: bool,
    /// Set when `width == 0` forced `aspect_ratio` to `0`.
    pub degenerate_aspect: bool,
}

impl<T: Real> Default for MeshFeatures<T> {
    fn default() -> Self {
        Self {
            height: T::zero(),
            length: T::zero(),
            width: T::zero(),
            aspect_ratio: T::zero(),
            volume: T::zero(),
            surface_area: T::zero(),
            bbox_area: T::zero(),
            bbox_volume: T::zero(),
            n_components: 0,
            quasi_volume: false,
            degenerate_aspect: false,
        }
    }
}

/// Options for [`extract_features`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureOptions {
    /// Take length/width from the axis-aligned XY extents instead of the
    /// oriented minimum rectangle (legacy behaviour; see module docs).
    pub axis_aligned_lw: bool,
}

/// Total triangle area of the mesh.
pub fn surface_area<T: Real>(mesh: &TriangleMesh<T>) -> T {
    let mut total = T::zero();
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle_points(t);
        total += (b - a).cross(c - a).norm() * T::half();
    }
    total
}

/// Magnitude of the signed enclosed volume via the divergence theorem,
/// together with a flag that is `true` when the mesh is not watertight (the
/// value is then only a quasi-volume).
///
/// The signed sum is taken relative to the vertex centroid for numerical
/// stability; for a closed surface the result is independent of the reference
/// point.
pub fn enclosed_volume<T: Real>(mesh: &TriangleMesh<T>) -> (T, bool) {
    if mesh.triangles.is_empty() {
        return (T::zero(), false);
    }
    let r = vertex_centroid(mesh);
    let mut six_vol = T::zero();
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle_points(t);
        six_vol += (a - r).dot((b - r).cross(c - r));
    }
    let volume = (six_vol / T::of(6.0)).abs();
    (volume, !is_watertight(mesh))
}

/// `true` when every edge is shared by exactly two triangles with opposite
/// orientation (each directed edge appears exactly once).
pub fn is_watertight<T: Real>(mesh: &TriangleMesh<T>) -> bool {
    if mesh.triangles.is_empty() {
        return false;
    }
    let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
    for t in &mesh.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            if a == b {
                return false;
            }
            *directed.entry((a, b)).or_insert(0) += 1;
        }
    }
    directed
        .iter()
        .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
}

/// Splits the mesh into vertex-connected components.
///
/// Two triangles are in the same component when they share a vertex index.
/// Returns the component count together with one compacted submesh per
/// component; components are ordered by their smallest original vertex index
/// and each submesh keeps its vertices in ascending original order.
pub fn connected_components<T: Real>(mesh: &TriangleMesh<T>) -> (usize, Vec<TriangleMesh<T>>) {
    if mesh.triangles.is_empty() {
        return (0, Vec::new());
    }
    let mut uf = UnionFind::new(mesh.vertices.len());
    for t in &mesh.triangles {
        uf.union(t[0] as usize, t[1] as usize);
        uf.union(t[0] as usize, t[2] as usize);
    }

    // Component label for each referenced vertex, keyed by union-find root;
    // labels are assigned in order of smallest member vertex index.
    let mut label_of_root: HashMap<usize, usize> = HashMap::new();
    let mut comp_triangles: Vec<Vec<[u32; 3]>> = Vec::new();
    for v in 0..mesh.vertices.len() {
        if !uf.touched[v] {
            continue;
        }
        let root = uf.find(v);
        label_of_root.entry(root).or_insert_with(|| {
            comp_triangles.push(Vec::new());
            comp_triangles.len() - 1
        });
    }
    for t in &mesh.triangles {
        let label = label_of_root[&uf.find(t[0] as usize)];
        comp_triangles[label].push(*t);
    }

    let mut submeshes = Vec::with_capacity(comp_triangles.len());
    for tris in &comp_triangles {
        let mut used: Vec<u32> = tris.iter().flatten().copied().collect();
        used.sort_unstable();
        used.dedup();
        let remap: HashMap<u32, u32> = used
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new as u32))
            .collect();
        let vertices = used
            .iter()
            .map(|&old| mesh.vertices[old as usize])
            .collect();
        let triangles = tris
            .iter()
            .map(|t| [remap[&t[0]], remap[&t[1]], remap[&t[2]]])
            .collect();
        submeshes.push(TriangleMesh::new(vertices, triangles));
    }
    (submeshes.len(), submeshes)
}

/// Minimum-area oriented rectangle of a 2-D point set.
///
/// Returns `(length, width, area)` with `length >= width`. Uses the convex
/// hull and the fact that a minimum-area rectangle has one side collinear
/// with a hull edge. Degenerate inputs: fewer than two distinct points give
/// all zeros; collinear points give the segment length with zero width.
pub fn min_rect_xy<T: Real>(points: &[[T; 2]]) -> (T, T, T) {
    let hull = convex_hull_xy(points);
    match hull.len() {
        0 | 1 => (T::zero(), T::zero(), T::zero()),
        2 => {
            let dx = hull[1][0] - hull[0][0];
            let dy = hull[1][1] - hull[0][1];
            ((dx * dx + dy * dy).sqrt(), T::zero(), T::zero())
        }
        n => {
            let mut best: Option<(T, T, T)> = None; // (area, du, dv)
            for i in 0..n {
                let p = hull[i];
                let q = hull[(i + 1) % n];
                let ex = q[0] - p[0];
                let ey = q[1] - p[1];
                let len = (ex * ex + ey * ey).sqrt();
                if len <= T::zero() {
                    continue;
                }
                let dx = ex / len;
                let dy = ey / len;
                let mut umin = T::infinity();
                let mut umax = T::neg_infinity();
                let mut vmin = T::infinity();
                let mut vmax = T::neg_infinity();
                for h in &hull {
                    let u = h[0] * dx + h[1] * dy;
                    let v = -h[0] * dy + h[1] * dx;
                    umin = umin.min(u);
                    umax = umax.max(u);
                    vmin = vmin.min(v);
                    vmax = vmax.max(v);
                }
                let du = umax - umin;
                let dv = vmax - vmin;
                let area = du * dv;
                if best.map_or(true, |(a, _, _)| area < a) {
                    best = Some((area, du, dv));
                }
            }
            let (area, du, dv) = best.expect("non-empty hull");
            (du.max(dv), du.min(dv), area)
        }
    }
}

/// Strictly convex hull of 2-D points (counterclockwise, collinear points
/// dropped) via Andrew's monotone chain.
fn convex_hull_xy<T: Real>(points: &[[T; 2]]) -> Vec<[T; 2]> {
    let mut pts: Vec<[T; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0].is_finite() && p[1].is_finite())
        .collect();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });
    pts.dedup_by(|a, b| a[0] == b[0] && a[1] == b[1]);
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: [T; 2], a: [T; 2], b: [T; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[T; 2]> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2
            && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= T::zero()
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[T; 2]> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= T::zero()
        {
            upper.pop();
        }
        upper.push(p);
    }
    // Each chain's last point is the other chain's first.
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Computes all features of a mesh.
///
/// An empty mesh yields all-zero features with `n_components == 0`. With
/// `axis_aligned_lw` set, length/width/bbox_area come from the axis-aligned
/// XY extents instead of the oriented minimum rectangle.
pub fn extract_features<T: Real>(
    mesh: &TriangleMesh<T>,
    options: &FeatureOptions,
) -> MeshFeatures<T> {
    if mesh.is_empty() {
        return MeshFeatures::default();
    }
    let bbox = mesh.bbox().expect("non-empty mesh has a bbox");
    let extent = bbox.extent();
    let height = extent.z;

    let (length, width, bbox_area) = if options.axis_aligned_lw {
        (
            extent.x.max(extent.y),
            extent.x.min(extent.y),
            extent.x * extent.y,
        )
    } else {
        let xy: Vec<[T; 2]> = mesh.vertices.iter().map(|v| [v.x, v.y]).collect();
        min_rect_xy(&xy)
    };
    let degenerate_aspect = width <= T::zero();
    let aspect_ratio = if degenerate_aspect {
        T::zero()
    } else {
        length / width
    };

    let (volume, quasi_volume) = enclosed_volume(mesh);
    let (n_components, _) = component_count_only(mesh);

    MeshFeatures {
        height,
        length,
        width,
        aspect_ratio,
        volume,
        surface_area: surface_area(mesh),
        bbox_area,
        bbox_volume: bbox_area * height,
        n_components,
        quasi_volume,
        degenerate_aspect,
    }
}

/// Component count without materializing submeshes.
fn component_count_only<T: Real>(mesh: &TriangleMesh<T>) -> (usize, ()) {
    if mesh.triangles.is_empty() {
        return (0, ());
    }
    let mut uf = UnionFind::new(mesh.vertices.len());
    for t in &mesh.triangles {
        uf.union(t[0] as usize, t[1] as usize);
        uf.union(t[0] as usize, t[2] as usize);
    }
    let mut roots: Vec<usize> = Vec::new();
    for v in 0..mesh.vertices.len() {
        if uf.touched[v] {
            roots.push(uf.find(v));
        }
    }
    roots.sort_unstable();
    roots.dedup();
    (roots.len(), ())
}

fn vertex_centroid<T: Real>(mesh: &TriangleMesh<T>) -> Vec3<T> {
    let mut c = Vec3::zero();
    for v in &mesh.vertices {
        c += *v;
    }
    c * (T::one() / T::of_usize(mesh.vertices.len()))
}

struct UnionFind {
    parent: Vec<usize>,
    touched: Vec<bool>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            touched: vec![false; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        self.touched[a] = true;
        self.touched[b] = true;
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Deterministic: smaller root wins.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
