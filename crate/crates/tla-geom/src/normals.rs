//! Normal estimation from local covariance.

use rayon::prelude::*;
use tla_core::math::{eigen_sym3, Mat3, Vec3};
use tla_core::{CameraPoses, PointCloud, Real};

use crate::error::{GeomError, Result};
use crate::spatial::{default_cell_size, PointGrid};

/// Estimates per-point normals as the smallest-eigenvalue eigenvector of the
/// k-nearest-neighbor covariance (the query point counts among its own
/// neighbors). Normals are oriented toward the nearest camera when poses are
/// given, and away from the cloud centroid otherwise.
pub fn estimate_normals<T: Real>(
    cloud: &PointCloud<T>,
    k: usize,
    cameras: Option<&CameraPoses<T>>,
) -> Result<PointCloud<T>> {
    if k < 3 {
        return Err(GeomError::InvalidParam(format!(
            "normal estimation needs k ≥ 3 neighbors, got {k}"
        )));
    }
    if cloud.len() < k {
        return Err(GeomError::InsufficientPoints(format!(
            "normal estimation with k = {k} needs at least {k} points, got {}",
            cloud.len()
        )));
    }
    let pts = &cloud.points;
    let grid = PointGrid::build(pts, default_cell_size(pts));
    let centroid = cloud.centroid().unwrap_or_else(Vec3::zero);
    let cameras = cameras.filter(|c| !c.is_empty());

    let normals: Vec<Vec3<T>> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let p = pts[i];
            let nn = grid.k_nearest(p, k);
            let m = T::of_usize(nn.len());
            let mean = nn
                .iter()
                .fold(Vec3::zero(), |a, &j| a + pts[j as usize])
                / m;
            let mut cov = Mat3::zero();
            for &j in &nn {
                let d = pts[j as usize] - mean;
                cov = cov.add(&Mat3::outer(d, d));
            }
            let (_, vecs) = eigen_sym3(&cov);
            let mut n = vecs.column(0).normalized().unwrap_or(Vec3::new(
                T::zero(),
                T::zero(),
                T::one(),
            ));

            // Orientation reference: nearest camera, else away from centroid.
            let toward = match cameras {
                Some(cams) => {
                    let nearest = cams
                        .positions
                        .iter()
                        .min_by(|a, b| {
                            (**a - p)
                                .norm_sq()
                                .partial_cmp(&(**b - p).norm_sq())
                                .unwrap_or(std::cmp::Ordering::Equal)
                        })
                        .copied()
                        .unwrap();
                    nearest - p
                }
                None => p - centroid,
            };
            let d = n.dot(toward);
            if d < T::zero() {
                n = -n;
            } else if d == T::zero() {
                // No orientation evidence: deterministic +Z hemisphere.
                let flip = if n.z != T::zero() {
                    n.z < T::zero()
                } else if n.y != T::zero() {
                    n.y < T::zero()
                } else {
                    n.x < T::zero()
                };
                if flip {
                    n = -n;
                }
            }
            n
        })
        .collect();

    Ok(PointCloud {
        points: cloud.points.clone(),
        colors: cloud.colors.clone(),
        normals: Some(normals),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_cloud(n: usize) -> PointCloud<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        PointCloud::new(
            (0..n)
                .map(|_| Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), 0.0))
                .collect(),
        )
    }

    #[test]
    fn planar_cloud_with_camera_above() {
        let cloud = plane_cloud(500);
        let cams = CameraPoses::new(vec![Vec3::new(0.0, 0.0, 10.0)]);
        let out = estimate_normals(&cloud, 10, Some(&cams)).unwrap();
        for n in out.normals.unwrap() {
            assert!((n - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-9, "normal {n:?}");
        }
    }

    #[test]
    fn planar_cloud_without_cameras_gives_axis_normals() {
        let cloud = plane_cloud(500);
        let out = estimate_normals(&cloud, 10, None).unwrap();
        for n in out.normals.unwrap() {
            assert!(
                (n - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-9
                    || (n + Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-9
            );
        }
    }

    #[test]
    fn sphere_normals_point_outward() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        // Uniform directions via normalized Gaussian triples.
        let gauss = |rng: &mut rand_chacha::ChaCha8Rng| {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (-2.0 * u1.ln()).sqrt() * u2.cos()
        };
        let pts: Vec<Vec3<f64>> = (0..2000)
            .map(|_| {
                Vec3::new(gauss(&mut rng), gauss(&mut rng), gauss(&mut rng))
                    .normalized()
                    .unwrap()
            })
            .collect();
        let cloud = PointCloud::new(pts.clone());
        let out = estimate_normals(&cloud, 12, None).unwrap();
        let normals = out.normals.unwrap();
        let good = pts
            .iter()
            .zip(&normals)
            .filter(|(p, n)| n.dot(**p) > 0.0)
            .count();
        assert!(
            good as f64 >= 0.99 * pts.len() as f64,
            "only {good}/{} outward",
            pts.len()
        );
    }

    #[test]
    fn k_larger_than_cloud_is_an_error() {
        let cloud = plane_cloud(5);
        assert!(matches!(
            estimate_normals(&cloud, 10, None).unwrap_err(),
            GeomError::InsufficientPoints(_)
        ));
        assert!(matches!(
            estimate_normals(&cloud, 2, None).unwrap_err(),
            GeomError::InvalidParam(_)
        ));
    }
}
