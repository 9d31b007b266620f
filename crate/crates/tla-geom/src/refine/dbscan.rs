//! DBSCAN denoising with order-invariant output.

use tla_core::math::Vec3;
use tla_core::{PointCloud, Real};

use crate::spatial::PointGrid;

/// DBSCAN parameters. `eps_rel` is relative to the cloud's bounding-box
/// diagonal so the step is unit-independent before scaling.
#[derive(Clone, Copy, Debug)]
pub struct DbscanParams<T> {
    pub eps_rel: T,
    pub min_samples: usize,
}

impl<T: Real> Default for DbscanParams<T> {
    fn default() -> Self {
        DbscanParams {
            eps_rel: T::of(0.01),
            min_samples: 10,
        }
    }
}

/// Clustering outcome: `labels[i]` is the cluster of point `i`, −1 = noise.
///
/// Labels are assigned by a position-based rule (clusters ordered by their
/// lexicographically smallest member point), so the partition *and* the
/// label values are invariant to input permutation.
#[derive(Clone, Debug)]
pub struct DbscanResult<T> {
    pub labels: Vec<i32>,
    /// Size of each cluster, indexed by label.
    pub cluster_sizes: Vec<usize>,
    pub n_noise: usize,
    /// The absolute eps used (eps_rel × bbox diagonal).
    pub eps_abs: T,
}

impl<T: Real> DbscanResult<T> {
    /// Union of all non-noise points, in input order.
    pub fn denoised(&self, cloud: &PointCloud<T>) -> PointCloud<T> {
        let keep: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l >= 0)
            .map(|(i, _)| i)
            .collect();
        cloud.select(&keep)
    }

    /// The largest cluster (ties break on the smaller label), in input order.
    pub fn largest_cluster(&self, cloud: &PointCloud<T>) -> Option<PointCloud<T>> {
        let best = self
            .cluster_sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?
            .0 as i32;
        let keep: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == best)
            .map(|(i, _)| i)
            .collect();
        Some(cloud.select(&keep))
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }
    fn find(&mut self, i: u32) -> u32 {
        let mut root = i;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        // Path compression.
        let mut cur = i;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Deterministic: smaller index becomes the root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Standard DBSCAN: a core point has ≥ `min_samples` neighbors within eps
/// (the neighborhood includes the point itself); clusters are the connected
/// components of core points plus their border points. Border points attach
/// to their nearest core point (ties by the core's lexicographic position),
/// which — together with position-ordered labels — makes the whole result
/// independent of input order.
pub fn dbscan<T: Real>(cloud: &PointCloud<T>, params: &DbscanParams<T>) -> DbscanResult<T> {
    let n = cloud.len();
    let pts = &cloud.points;
    if n == 0 {
        return DbscanResult {
            labels: Vec::new(),
            cluster_sizes: Vec::new(),
            n_noise: 0,
            eps_abs: T::zero(),
        };
    }

    let diag = cloud.bbox().map(|b| b.diagonal()).unwrap_or_else(T::zero);
    let eps = params.eps_rel * diag;
    let grid = PointGrid::for_radius(pts, if eps > T::zero() { eps } else { T::one() });

    let neighbors: Vec<Vec<u32>> = (0..n).map(|i| grid.within_radius(pts[i], eps)).collect();
    let core: Vec<bool> = neighbors
        .iter()
        .map(|nb| nb.len() >= params.min_samples)
        .collect();

    // Connected components of core points.
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        if !core[i] {
            continue;
        }
        for &j in &neighbors[i] {
            if core[j as usize] {
                uf.union(i as u32, j);
            }
        }
    }

    // Provisional assignment: cluster root per point, or None for noise.
    let mut root_of: Vec<Option<u32>> = vec![None; n];
    for i in 0..n {
        if core[i] {
            root_of[i] = Some(uf.find(i as u32));
        }
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        // Border point: nearest core neighbor, ties by lexicographic position.
        let mut best: Option<(T, Vec3<T>, u32)> = None;
        for &j in &neighbors[i] {
            if !core[j as usize] {
                continue;
            }
            let d = (pts[j as usize] - pts[i]).norm_sq();
            let cand = (d, pts[j as usize], j);
            let better = match &best {
                None => true,
                Some((bd, bp, _)) => {
                    d < *bd || (d == *bd && cand.1.lex_cmp(*bp) == std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some(cand);
            }
        }
        if let Some((_, _, j)) = best {
            root_of[i] = Some(uf.find(j));
        }
    }

    // Order clusters by their lexicographically smallest member position.
    let mut cluster_min: std::collections::HashMap<u32, Vec3<T>> = std::collections::HashMap::new();
    for i in 0..n {
        if let Some(r) = root_of[i] {
            cluster_min
                .entry(r)
                .and_modify(|m| {
                    if pts[i].lex_cmp(*m) == std::cmp::Ordering::Less {
                        *m = pts[i];
                    }
                })
                .or_insert(pts[i]);
        }
    }
    let mut order: Vec<(Vec3<T>, u32)> = cluster_min.into_iter().map(|(r, m)| (m, r)).collect();
    order.sort_by(|a, b| a.0.lex_cmp(b.0));
    let label_of_root: std::collections::HashMap<u32, i32> = order
        .iter()
        .enumerate()
        .map(|(l, &(_, r))| (r, l as i32))
        .collect();

    let mut labels = vec![-1i32; n];
    let mut cluster_sizes = vec![0usize; order.len()];
    let mut n_noise = 0usize;
    for i in 0..n {
        match root_of[i] {
            Some(r) => {
                let l = label_of_root[&r];
                labels[i] = l;
                cluster_sizes[l as usize] += 1;
            }
            None => n_noise += 1,
        }
    }

    DbscanResult {
        labels,
        cluster_sizes,
        n_noise,
        eps_abs: eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(center: Vec3<f64>, n: usize, spread: f64, seed: u64) -> Vec<Vec3<f64>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                center
                    + Vec3::new(
                        rng.gen_range(-spread..spread),
                        rng.gen_range(-spread..spread),
                        rng.gen_range(-spread..spread),
                    )
            })
            .collect()
    }

    #[test]
    fn two_blobs_and_one_outlier() {
        let mut pts = blob(Vec3::new(0.0, 0.0, 0.0), 50, 0.5, 1);
        pts.extend(blob(Vec3::new(20.0, 0.0, 0.0), 50, 0.5, 2));
        pts.push(Vec3::new(10.0, 40.0, 0.0)); // isolated
        let cloud = PointCloud::new(pts);
        let res = dbscan(
            &cloud,
            &DbscanParams {
                eps_rel: 0.05,
                min_samples: 5,
            },
        );
        assert_eq!(res.cluster_sizes.len(), 2);
        assert_eq!(res.n_noise, 1);
        assert_eq!(res.labels[100], -1);
        assert_eq!(res.cluster_sizes, vec![50, 50]);
        let denoised = res.denoised(&cloud);
        assert_eq!(denoised.len(), 100);
    }

    #[test]
    fn min_samples_one_means_no_noise() {
        let cloud = PointCloud::new(blob(Vec3::new(0.0, 0.0, 0.0), 30, 5.0, 3));
        let res = dbscan(
            &cloud,
            &DbscanParams {
                eps_rel: 0.001,
                min_samples: 1,
            },
        );
        assert_eq!(res.n_noise, 0);
        assert!(res.labels.iter().all(|&l| l >= 0));
    }

    #[test]
    fn permutation_yields_identical_labels() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut pts = blob(Vec3::new(0.0, 0.0, 0.0), 40, 1.0, 4);
        pts.extend(blob(Vec3::new(15.0, 3.0, -2.0), 35, 1.0, 5));
        pts.extend(blob(Vec3::new(-9.0, 12.0, 6.0), 25, 1.0, 6));
        let params = DbscanParams {
            eps_rel: 0.04,
            min_samples: 4,
        };
        let base = dbscan(&PointCloud::new(pts.clone()), &params);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut perm: Vec<usize> = (0..pts.len()).collect();
        perm.shuffle(&mut rng);
        let shuffled: Vec<Vec3<f64>> = perm.iter().map(|&i| pts[i]).collect();
        let shuf = dbscan(&PointCloud::new(shuffled), &params);

        // Because labels are position-ordered, the permuted run must assign
        // the *same* label to the same physical point — not merely an
        // equivalent partition.
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            assert_eq!(shuf.labels[new_idx], base.labels[old_idx]);
        }
    }

    #[test]
    fn all_coincident_points_form_one_cluster() {
        let cloud = PointCloud::new(vec![Vec3::new(1.0, 2.0, 3.0); 12]);
        let res = dbscan(
            &cloud,
            &DbscanParams {
                eps_rel: 0.01,
                min_samples: 10,
            },
        );
        assert_eq!(res.cluster_sizes, vec![12]);
        assert_eq!(res.n_noise, 0);
    }
}
