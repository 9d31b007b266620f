//! Pot-referenced scaling and rotation: total-least-squares plane fit,
//! Kåsa circle fit, and the similarity transform that puts the pot rim on
//! the circle {x² + y² = (d/2)², z = 0}.

use tla_core::math::{eigen_sym3, Mat3, Vec3};
use tla_core::{PointCloud, Real};

use crate::error::{GeomError, Result};

/// A plane in Hessian normal form: n·x = offset with |n| = 1.
#[derive(Clone, Copy, Debug)]
pub struct Plane<T> {
    pub normal: Vec3<T>,
    pub offset: T,
}

impl<T: Real> Plane<T> {
    /// Signed distance from a point to the plane.
    pub fn signed_distance(&self, p: Vec3<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    /// A point on the plane (the foot of the origin's perpendicular).
    pub fn anchor(&self) -> Vec3<T> {
        self.normal * self.offset
    }

    /// Orthogonal projection of a point onto the plane.
    pub fn project(&self, p: Vec3<T>) -> Vec3<T> {
        p - self.normal * self.signed_distance(p)
    }
}

/// The fitted pot geometry used as the metric/orientation reference.
#[derive(Clone, Copy, Debug)]
pub struct PotReference<T> {
    /// Physical pot diameter in cm (default 15).
    pub known_diameter: T,
    pub plane: Plane<T>,
    pub circle_center: Vec3<T>,
    /// Rim radius in raw (pre-scaling) units.
    pub measured_radius: T,
}

/// p ↦ scale · R · p + translation.
#[derive(Clone, Copy, Debug)]
pub struct SimilarityTransform<T> {
    pub scale: T,
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> SimilarityTransform<T> {
    pub fn identity() -> Self {
        SimilarityTransform {
            scale: T::one(),
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
        }
    }

    pub fn apply_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) * self.scale + self.translation
    }

    /// The transform that undoes this one.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        let inv_scale = T::one() / self.scale;
        SimilarityTransform {
            scale: inv_scale,
            rotation: rt,
            translation: rt.mul_vec(self.translation) * (-inv_scale),
        }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        SimilarityTransform {
            scale: self.scale * other.scale,
            rotation: self.rotation.mul_mat(&other.rotation),
            translation: self.rotation.mul_vec(other.translation) * self.scale
                + self.translation,
        }
    }

    /// Checks orthonormality (RᵀR = I within 1e-9), det +1, and scale > 0.
    pub fn is_valid(&self) -> bool {
        self.scale > T::zero()
            && self.rotation.is_rotation(T::of(1e-9))
            && self.translation.is_finite()
    }
}

/// Fits a plane by total least squares (orthogonal distances): the normal is
/// the smallest-eigenvalue eigenvector of the point covariance. The normal
/// is oriented toward the +Z hemisphere (tie-broken toward +Y, then +X).
pub fn fit_plane_lsq<T: Real>(points: &[Vec3<T>]) -> Result<Plane<T>> {
    if points.len() < 3 {
        return Err(GeomError::InsufficientPoints(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = T::of_usize(points.len());
    let centroid = points.iter().fold(Vec3::zero(), |a, &p| a + p) / n;
    let mut cov = Mat3::zero();
    for &p in points {
        let d = p - centroid;
        cov = cov.add(&Mat3::outer(d, d));
    }
    let (vals, vecs) = eigen_sym3(&cov);
    // Spread must exist in at least two directions, or the normal is not
    // unique (collinear input).
    if !(vals[1] > vals[2] * T::of(1e-12)) {
        return Err(GeomError::Degenerate(
            "points are collinear; the fitted plane is not unique".into(),
        ));
    }
    let mut normal = vecs.column(0);
    let flip = if normal.z != T::zero() {
        normal.z < T::zero()
    } else if normal.y != T::zero() {
        normal.y < T::zero()
    } else {
        normal.x < T::zero()
    };
    if flip {
        normal = -normal;
    }
    let normal = normal
        .normalized()
        .ok_or_else(|| GeomError::Degenerate("zero-length plane normal".into()))?;
    Ok(Plane {
        normal,
        offset: normal.dot(centroid),
    })
}

/// Deterministic orthonormal basis (u, v) spanning the plane.
fn plane_basis<T: Real>(normal: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    // Seed with the coordinate axis least aligned with the normal.
    let ax = normal.x.abs();
    let ay = normal.y.abs();
    let az = normal.z.abs();
    let seed = if ax <= ay && ax <= az {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else if ay <= az {
        Vec3::new(T::zero(), T::one(), T::zero())
    } else {
        Vec3::new(T::zero(), T::zero(), T::one())
    };
    let u = normal.cross(seed).normalized().expect("seed not parallel");
    let v = normal.cross(u);
    (u, v)
}

/// Fits a circle to points projected onto `plane` by Kåsa-style linear least
/// squares, lifting the center back to 3D. Returns (center, radius).
pub fn fit_circle_on_plane<T: Real>(
    points: &[Vec3<T>],
    plane: &Plane<T>,
) -> Result<(Vec3<T>, T)> {
    if points.len() < 3 {
        return Err(GeomError::InsufficientPoints(format!(
            "circle fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let (u, v) = plane_basis(plane.normal);
    let anchor = plane.anchor();

    // Kåsa: minimize Σ (a² + b² + D·a + E·b + F)², a linear problem in
    // (D, E, F); then center = (−D/2, −E/2), r² = D²/4 + E²/4 − F.
    let mut m = Mat3::zero();
    let mut rhs = Vec3::zero();
    for &p in points {
        let d = p - anchor;
        let a = d.dot(u);
        let b = d.dot(v);
        let row = Vec3::new(a, b, T::one());
        m = m.add(&Mat3::outer(row, row));
        let y = -(a * a + b * b);
        rhs = rhs + row * y;
    }
    let sol = m.inverse().ok_or_else(|| {
        GeomError::Degenerate("circle fit is singular (collinear projections)".into())
    })?;
    let def = sol.mul_vec(rhs);
    let (cd, ce, cf) = (def.x, def.y, def.z);
    let ca = -cd * T::half();
    let cb = -ce * T::half();
    let r_sq = ca * ca + cb * cb - cf;
    if !(r_sq > T::zero()) {
        return Err(GeomError::Degenerate(
            "circle fit produced a non-positive radius".into(),
        ));
    }
    let center = anchor + u * ca + v * cb;
    Ok((center, r_sq.sqrt()))
}

/// Builds the transform that maps the measured pot rim onto the circle
/// {x² + y² = (d/2)², z = 0}: scale = (d/2)/r, rotation takes the plane
/// normal to +Z, translation takes the rim center to the origin.
pub fn compute_similarity_transform<T: Real>(
    pot: &PotReference<T>,
) -> Result<SimilarityTransform<T>> {
    if !(pot.measured_radius > T::zero()) {
        return Err(GeomError::InvalidParam(format!(
            "measured pot radius must be positive, got {}",
            pot.measured_radius
        )));
    }
    if !(pot.known_diameter > T::zero()) {
        return Err(GeomError::InvalidParam(format!(
            "known pot diameter must be positive, got {}",
            pot.known_diameter
        )));
    }
    let normal = pot
        .plane
        .normal
        .normalized()
        .ok_or_else(|| GeomError::Degenerate("pot plane normal has zero length".into()))?;
    let scale = pot.known_diameter * T::half() / pot.measured_radius;
    let rotation = Mat3::rotation_between(normal, Vec3::new(T::zero(), T::zero(), T::one()));
    let translation = rotation.mul_vec(pot.circle_center) * (-scale);
    Ok(SimilarityTransform {
        scale,
        rotation,
        translation,
    })
}

/// Applies a similarity transform to a cloud: points are mapped through it,
/// normals are rotated only (and re-normalized), colors are unchanged.
pub fn apply_transform<T: Real>(
    cloud: &PointCloud<T>,
    t: &SimilarityTransform<T>,
) -> PointCloud<T> {
    PointCloud {
        points: cloud.points.iter().map(|&p| t.apply_point(p)).collect(),
        colors: cloud.colors.clone(),
        normals: cloud.normals.as_ref().map(|ns| {
            ns.iter()
                .map(|&n| t.rotation.mul_vec(n).normalized().unwrap_or(n))
                .collect()
        }),
    }
}
