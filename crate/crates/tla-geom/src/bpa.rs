//! Ball-pivoting surface reconstruction (Bernardini et al. style).
//!
//! A virtual ball of radius r rests on three points (its interior empty of
//! all other points) and pivots around advancing-front edges; each first
//! contact spawns a triangle. Radii are processed in ascending order, and
//! edges left open by a smaller ball are retried with the next radius.

use std::collections::{HashMap, HashSet, VecDeque};

use tla_core::math::Vec3;
use tla_core::{PointCloud, Real, TriangleMesh};

use crate::delaunay::triangle_circumsphere;
use crate::error::{GeomError, Result};
use crate::spatial::PointGrid;

/// Strictness factor for the empty-ball test: points closer than
/// r·(1 − 1e-7) to the ball center invalidate it, anything at or beyond
/// counts as touching.
const BALL_SLACK: f64 = 1e-7;

/// A directed advancing-front edge: the mesh already contains triangle
/// `[i, j, opposite]`, and the ball that created it rested at `center`.
#[derive(Clone, Copy)]
struct FrontEdge {
    i: u32,
    j: u32,
    opposite: u32,
    center: [f64; 3], // stored in f64 to stay Copy-simple across T
}

struct Bpa<'a, T: Real> {
    points: &'a [Vec3<T>],
    normals: &'a [Vec3<T>],
    triangles: Vec<[u32; 3]>,
    tri_set: HashSet<[u32; 3]>,
    /// Undirected edge -> number of incident triangles (max 2).
    edge_tris: HashMap<(u32, u32), u8>,
    used: Vec<bool>,
    front: VecDeque<FrontEdge>,
    /// Edges that failed to pivot at the current radius.
    boundary: Vec<FrontEdge>,
}

fn ekey(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

impl<'a, T: Real> Bpa<'a, T> {
    /// Ball center of radius `r` resting on the triangle (a, b, c), on the
    /// side its winding normal points to. `None` when the circumradius
    /// exceeds `r` (the ball cannot touch all three points).
    fn ball_center(&self, a: u32, b: u32, c: u32, r: T) -> Option<Vec3<T>> {
        let (pa, pb, pc) = (
            self.points[a as usize],
            self.points[b as usize],
            self.points[c as usize],
        );
        let (cc, rc) = triangle_circumsphere(pa, pb, pc)?;
        let h2 = r * r - rc * rc;
        if h2 < T::zero() {
            return None;
        }
        let n = (pb - pa).cross(pc - pa).normalized()?;
        Some(cc + n * h2.sqrt())
    }

    /// True when no point other than the listed ones lies strictly inside
    /// the ball.
    fn ball_is_empty(&self, grid: &PointGrid<'_, T>, center: Vec3<T>, r: T, t: [u32; 3]) -> bool {
        let strict = r * (T::one() - T::of(BALL_SLACK));
        grid.within_radius(center, strict)
            .into_iter()
            .all(|idx| t.contains(&idx))
    }

    /// Winding normal of triangle (a, b, c).
    fn tri_normal(&self, a: u32, b: u32, c: u32) -> Vec3<T> {
        let (pa, pb, pc) = (
            self.points[a as usize],
            self.points[b as usize],
            self.points[c as usize],
        );
        (pb - pa).cross(pc - pa)
    }

    fn normals_compatible(&self, a: u32, b: u32, c: u32) -> bool {
        let n = self.tri_normal(a, b, c);
        let avg = self.normals[a as usize] + self.normals[b as usize] + self.normals[c as usize];
        n.dot(avg) > T::zero()
    }

    fn add_triangle(&mut self, t: [u32; 3], center: Vec3<T>) {
        let mut key = t;
        key.sort_unstable();
        self.tri_set.insert(key);
        self.triangles.push(t);
        let center = [center.x.as_f64(), center.y.as_f64(), center.z.as_f64()];
        for (a, b, opp) in [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])] {
            let count = self.edge_tris.entry(ekey(a, b)).or_insert(0);
            *count += 1;
            if *count == 1 {
                self.front.push_back(FrontEdge {
                    i: a,
                    j: b,
                    opposite: opp,
                    center,
                });
            }
        }
        for &v in &t {
            self.used[v as usize] = true;
        }
    }

    fn triangle_exists(&self, mut t: [u32; 3]) -> bool {
        t.sort_unstable();
        self.tri_set.contains(&t)
    }

    /// Rolls the ball around edge (i, j) away from `opposite`; returns the
    /// first point hit and the ball's resting center there.
    fn pivot(
        &self,
        grid: &PointGrid<'_, T>,
        edge: &FrontEdge,
        r: T,
    ) -> Option<(u32, Vec3<T>)> {
        let pi = self.points[edge.i as usize];
        let pj = self.points[edge.j as usize];
        let m = (pi + pj) * T::half();
        let axis = (pj - pi).normalized()?;
        let c_old = Vec3::new(
            T::of(edge.center[0]),
            T::of(edge.center[1]),
            T::of(edge.center[2]),
        );
        let u_old = c_old - m;
        let u_old = u_old - axis * u_old.dot(axis); // should already be ⊥

        let two = T::two();
        let mut best: Option<(T, u32, Vec3<T>)> = None;
        for x in grid.within_radius(m, two * r) {
            if x == edge.i || x == edge.j || x == edge.opposite {
                continue;
            }
            // The new triangle would be [j, i, x]; respect manifoldness.
            if self.triangle_exists([edge.j, edge.i, x]) {
                continue;
            }
            if self.edge_tris.get(&ekey(edge.i, x)).copied().unwrap_or(0) >= 2
                || self.edge_tris.get(&ekey(edge.j, x)).copied().unwrap_or(0) >= 2
            {
                continue;
            }
            if !self.normals_compatible(edge.j, edge.i, x) {
                continue;
            }
            // Two possible resting centers (either side of the new plane).
            let px = self.points[x as usize];
            let Some((cc, rc)) = triangle_circumsphere(pi, pj, px) else {
                continue;
            };
            let h2 = r * r - rc * rc;
            if h2 < T::zero() {
                continue;
            }
            let Some(n) = (pj - pi).cross(px - pi).normalized() else {
                continue;
            };
            let h = h2.sqrt();
            for center in [cc + n * h, cc - n * h] {
                // Rotation angle from the old center around the edge axis,
                // measured in (0, 2π]: the rolling direction.
                let u_new = center - m;
                let u_new = u_new - axis * u_new.dot(axis);
                let sin = axis.dot(u_old.cross(u_new));
                let cos = u_old.dot(u_new);
                let mut theta = sin.as_f64().atan2(cos.as_f64());
                if theta <= 1e-12 {
                    theta += std::f64::consts::TAU;
                }
                let theta = T::of(theta);
                let better = match &best {
                    None => true,
                    Some((bt, bx, _)) => {
                        theta < *bt || (theta == *bt && x < *bx)
                    }
                };
                if better && self.ball_is_empty(grid, center, r, [edge.i, edge.j, x]) {
                    best = Some((theta, x, center));
                }
            }
        }
        best.map(|(_, x, c)| (x, c))
    }

    /// Finds a seed triangle among unused points, scanning in index order.
    fn find_seed(&self, grid: &PointGrid<'_, T>, r: T) -> Option<([u32; 3], Vec3<T>)> {
        let two = T::two();
        for i in 0..self.points.len() as u32 {
            if self.used[i as usize] {
                continue;
            }
            let mut neigh: Vec<u32> = grid
                .within_radius(self.points[i as usize], two * r)
                .into_iter()
                .filter(|&x| x != i)
                .collect();
            // Prefer close companions; determinism via (distance, index).
            neigh.sort_by(|&a, &b| {
                let da = (self.points[a as usize] - self.points[i as usize]).norm_sq();
                let db = (self.points[b as usize] - self.points[i as usize]).norm_sq();
                da.partial_cmp(&db)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            for (ai, &a) in neigh.iter().enumerate() {
                for &b in neigh.iter().skip(ai + 1) {
                    let mut t = [i, a, b];
                    if !self.normals_compatible(t[0], t[1], t[2]) {
                        t = [i, b, a];
                        if !self.normals_compatible(t[0], t[1], t[2]) {
                            continue;
                        }
                    }
                    if self.triangle_exists(t) {
                        continue;
                    }
                    let Some(center) = self.ball_center(t[0], t[1], t[2], r) else {
                        continue;
                    };
                    if self.ball_is_empty(grid, center, r, t) {
                        return Some((t, center));
                    }
                }
            }
        }
        None
    }

    fn run_radius(&mut self, r: T) {
        let grid = PointGrid::for_radius(self.points, r * T::two());
        // Reactivate edges left open by the previous radius: the resting
        // center is recomputed for the larger ball.
        let carried: Vec<FrontEdge> = self.boundary.drain(..).collect();
        for mut e in carried {
            if self.edge_tris.get(&ekey(e.i, e.j)).copied().unwrap_or(0) != 1 {
                continue;
            }
            if let Some(c) = self.ball_center(e.i, e.j, e.opposite, r) {
                e.center = [c.x.as_f64(), c.y.as_f64(), c.z.as_f64()];
                self.front.push_back(e);
            }
        }
        loop {
            while let Some(edge) = self.front.pop_front() {
                // Stale entries: the edge may have been closed meanwhile.
                if self.edge_tris.get(&ekey(edge.i, edge.j)).copied().unwrap_or(0) != 1 {
                    continue;
                }
                match self.pivot(&grid, &edge, r) {
                    Some((x, center)) => {
                        self.add_triangle([edge.j, edge.i, x], center);
                    }
                    None => self.boundary.push(edge),
                }
            }
            match self.find_seed(&grid, r) {
                Some((t, center)) => self.add_triangle(t, center),
                None => break,
            }
        }
    }
}

/// Reconstructs a surface by pivoting balls of the given radii (ascending)
/// over the oriented cloud. Returns an empty mesh when no ball ever seats.
pub fn ball_pivot<T: Real>(cloud: &PointCloud<T>, radii: &[T]) -> Result<TriangleMesh<T>> {
    let normals = cloud.normals.as_ref().ok_or_else(|| {
        GeomError::MissingNormals("ball pivoting needs oriented normals".into())
    })?;
    if radii.is_empty() {
        return Err(GeomError::InvalidParam("radii list is empty".into()));
    }
    if radii.iter().any(|r| !(*r > T::zero())) {
        return Err(GeomError::InvalidParam(
            "ball radii must all be positive".into(),
        ));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(GeomError::InvalidParam(
            "ball radii must be strictly ascending".into(),
        ));
    }
    if cloud.len() < 3 {
        return Ok(TriangleMesh::empty());
    }

    let mut bpa = Bpa {
        points: &cloud.points,
        normals,
        triangles: Vec::new(),
        tri_set: HashSet::new(),
        edge_tris: HashMap::new(),
        used: vec![false; cloud.len()],
        front: VecDeque::new(),
        boundary: Vec::new(),
    };
    for &r in radii {
        bpa.run_radius(r);
    }

    // Compact to referenced vertices in ascending index order.
    let mut used_idx: Vec<u32> = bpa.triangles.iter().flatten().copied().collect();
    used_idx.sort_unstable();
    used_idx.dedup();
    let mut remap = HashMap::with_capacity(used_idx.len());
    let mut vertices = Vec::with_capacity(used_idx.len());
    for (new, &old) in used_idx.iter().enumerate() {
        remap.insert(old, new as u32);
        vertices.push(cloud.points[old as usize]);
    }
    let triangles = bpa
        .triangles
        .iter()
        .map(|t| t.map(|v| remap[&v]))
        .collect();
    Ok(TriangleMesh::new(vertices, triangles))
}
