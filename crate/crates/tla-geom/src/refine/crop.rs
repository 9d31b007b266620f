//! Camera-referenced cube cropping.

use tla_core::{CameraPoses, PointCloud, Real};

use crate::error::{GeomError, Result};

/// Retains points inside an axis-aligned cube centered at the camera-position
/// centroid with side = `side_factor` × median camera-to-centroid distance.
/// Membership is inclusive (L∞ distance ≤ side/2).
pub fn crop_to_cube<T: Real>(
    cloud: &PointCloud<T>,
    cameras: &CameraPoses<T>,
    side_factor: T,
) -> Result<PointCloud<T>> {
    let centroid = cameras.centroid().ok_or_else(|| {
        GeomError::MissingReference("camera pose list is empty; cannot locate the crop cube".into())
    })?;
    if !(side_factor > T::zero()) {
        return Err(GeomError::InvalidParam(format!(
            "crop side_factor must be positive, got {side_factor}"
        )));
    }

    let mut dists: Vec<T> = cameras
        .positions
        .iter()
        .map(|&c| (c - centroid).norm())
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = if dists.len() % 2 == 1 {
        dists[dists.len() / 2]
    } else {
        (dists[dists.len() / 2 - 1] + dists[dists.len() / 2]) * T::half()
    };

    let half_side = side_factor * median * T::half();
    let keep: Vec<usize> = cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, &p)| (p - centroid).norm_inf() <= half_side)
        .map(|(i, _)| i)
        .collect();

    if keep.is_empty() {
        return Err(GeomError::EmptyCrop(format!(
            "no points inside the crop cube (side {}, centered at {:?})",
            side_factor * median,
            centroid.to_array().map(|v| v.as_f64())
        )));
    }
    Ok(cloud.select(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tla_core::math::Vec3;

    fn circle_cameras(radius: f64, n: usize) -> CameraPoses<f64> {
        CameraPoses::new(
            (0..n)
                .map(|i| {
                    let a = i as f64 / n as f64 * std::f64::consts::TAU;
                    Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
                })
                .collect(),
        )
    }

    #[test]
    fn keeps_only_points_inside_cube() {
        // Cameras on a circle of radius 10 around the origin: median
        // camera-centroid distance 10, so the cube spans ±5 per axis.
        let cams = circle_cameras(10.0, 12);
        let cloud = PointCloud::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(100.0, 0.0, 0.0),
        ]);
        let kept = crop_to_cube(&cloud, &cams, 1.0).unwrap();
        assert_eq!(kept.points.len(), 1);
        assert_eq!(kept.points[0].to_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn huge_side_factor_is_identity() {
        let cams = circle_cameras(10.0, 8);
        let cloud = PointCloud::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(100.0, -250.0, 40.0),
        ]);
        let kept = crop_to_cube(&cloud, &cams, 1e6).unwrap();
        assert_eq!(kept.points.len(), cloud.points.len());
    }

    #[test]
    fn empty_poses_and_empty_result_are_errors() {
        let cloud = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.0)]);
        let err = crop_to_cube(&cloud, &CameraPoses::new(vec![]), 1.0).unwrap_err();
        assert!(matches!(err, GeomError::MissingReference(_)));

        let cams = circle_cameras(1.0, 4);
        let far = PointCloud::new(vec![Vec3::new(100.0, 100.0, 100.0)]);
        let err = crop_to_cube(&far, &cams, 1.0).unwrap_err();
        assert!(matches!(err, GeomError::EmptyCrop(_)));
    }

    #[test]
    fn kept_fraction_matches_membership_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        // 8 cameras at the corners of a ±5 cube: centroid = origin, all
        // camera distances = 5√3, so the crop cube spans ±(5√3)/2.
        let mut corners = Vec::new();
        for &x in &[-5.0, 5.0] {
            for &y in &[-5.0, 5.0] {
                for &z in &[-5.0, 5.0] {
                    corners.push(Vec3::new(x, y, z));
                }
            }
        }
        let cams = CameraPoses::new(corners);
        let points: Vec<Vec3<f64>> = (0..1000)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(-20.0..20.0),
                    rng.gen_range(-20.0..20.0),
                    rng.gen_range(-20.0..20.0),
                )
            })
            .collect();
        let cloud = PointCloud::new(points.clone());
        let kept = crop_to_cube(&cloud, &cams, 1.0).unwrap();

        let half = 5.0 * 3.0_f64.sqrt() / 2.0;
        let oracle = points
            .iter()
            .filter(|p| p.x.abs() <= half && p.y.abs() <= half && p.z.abs() <= half)
            .count();
        assert_eq!(kept.points.len(), oracle);
    }

    #[test]
    fn colors_and_normals_survive_cropping() {
        let cams = circle_cameras(10.0, 4);
        let cloud = PointCloud {
            points: vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(50.0, 0.0, 0.0)],
            colors: Some(vec![[1, 2, 3], [4, 5, 6]]),
            normals: Some(vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0)]),
        };
        let kept = crop_to_cube(&cloud, &cams, 1.0).unwrap();
        assert_eq!(kept.colors.as_deref(), Some(&[[1u8, 2, 3]][..]));
        assert_eq!(kept.normals.unwrap()[0].to_array(), [0.0, 0.0, 1.0]);
    }
}
