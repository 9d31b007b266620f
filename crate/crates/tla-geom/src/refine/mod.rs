//! Point-cloud refinement: crop → DBSCAN denoise → green-index
//! classification → pot-referenced scaling and rotation.

mod color;
mod crop;
mod dbscan;
mod potfit;

pub use color::{classify_points, green_index, Classified, ColorFilterParams};
pub use crop::crop_to_cube;
pub use dbscan::{dbscan, DbscanParams, DbscanResult};
pub use potfit::{
    apply_transform, compute_similarity_transform, fit_circle_on_plane, fit_plane_lsq, Plane,
    PotReference, SimilarityTransform,
};

use tla_core::{CameraPoses, PointCloud, Real};

use crate::error::{GeomError, Result};

/// Everything the refinement stage can be configured with.
#[derive(Clone, Debug)]
pub struct RefineParams<T> {
    /// Crop cube side = `side_factor` × median camera-centroid distance.
    pub side_factor: T,
    pub dbscan: DbscanParams<T>,
    pub color: ColorFilterParams<T>,
    /// Physical pot diameter in cm; the scale reference.
    pub known_diameter_cm: T,
}

impl<T: Real> Default for RefineParams<T> {
    fn default() -> Self {
        RefineParams {
            side_factor: T::one(),
            dbscan: DbscanParams::default(),
            color: ColorFilterParams::default(),
            known_diameter_cm: T::of(15.0),
        }
    }
}

/// Output of the full refinement pipeline.
#[derive(Clone, Debug)]
pub struct Refined<T> {
    /// Canopy points in the pot frame (cm, pot rim at Z = 0).
    pub canopy: PointCloud<T>,
    /// Pot points in the pot frame (the scale/rotation reference).
    pub pot: PointCloud<T>,
    /// The transform that was applied to reach the pot frame.
    pub transform: SimilarityTransform<T>,
    /// Camera poses mapped into the pot frame.
    pub cameras: CameraPoses<T>,
    /// DBSCAN cluster count and noise count, for reporting.
    pub n_clusters: usize,
    pub n_noise: usize,
}

/// Runs the full refinement pipeline in pipeline order:
/// crop → DBSCAN → color classification → pot-referenced scale/rotation.
///
/// Only canopy points feed reconstruction; pot points serve as the scale
/// and orientation reference.
pub fn refine_cloud<T: Real>(
    cloud: &PointCloud<T>,
    cameras: &CameraPoses<T>,
    params: &RefineParams<T>,
) -> Result<Refined<T>> {
    let cropped = crop_to_cube(cloud, cameras, params.side_factor)?;

    let db = dbscan(&cropped, &params.dbscan);
    let denoised = db.denoised(&cropped);
    if denoised.is_empty() {
        return Err(GeomError::InsufficientPoints(
            "all points were classified as noise by DBSCAN".into(),
        ));
    }

    let classified = classify_points(&denoised, &params.color)?;
    if classified.pot.len() < 3 {
        return Err(GeomError::InsufficientPoints(format!(
            "only {} pot-colored points; need at least 3 to fit the pot reference",
            classified.pot.len()
        )));
    }

    let plane = fit_plane_lsq(&classified.pot.points)?;
    let (center, radius) = fit_circle_on_plane(&classified.pot.points, &plane)?;
    let pot_ref = PotReference {
        known_diameter: params.known_diameter_cm,
        plane,
        circle_center: center,
        measured_radius: radius,
    };
    let transform = compute_similarity_transform(&pot_ref)?;

    let canopy = apply_transform(&classified.canopy, &transform);
    let pot = apply_transform(&classified.pot, &transform);
    let cameras = CameraPoses::new(
        cameras
            .positions
            .iter()
            .map(|&p| transform.apply_point(p))
            .collect(),
    );

    Ok(Refined {
        canopy,
        pot,
        transform,
        cameras,
        n_clusters: db.cluster_sizes.len(),
        n_noise: db.n_noise,
    })
}
