//! 3×3 matrices with the few dense-linear-algebra routines the pipeline
//! needs: products, determinants/inverses, and a Jacobi eigen-solver for
//! symmetric matrices (plane fitting, normal estimation, covariance work).

use crate::math::Vec3;
use crate::scalar::Real;

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    /// `m[r][c]` is the entry at row `r`, column `c`.
    pub m: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    #[inline]
    pub fn new(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new([[T::zero(); 3]; 3])
    }

    #[inline]
    pub fn identity() -> Self {
        let mut m = Self::zero();
        m.m[0][0] = T::one();
        m.m[1][1] = T::one();
        m.m[2][2] = T::one();
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self::new([
            [c0.x, c1.x, c2.x],
            [c0.y, c1.y, c2.y],
            [c0.z, c1.z, c2.z],
        ])
    }

    /// Builds a matrix whose rows are the given vectors.
    pub fn from_rows(r0: Vec3<T>, r1: Vec3<T>, r2: Vec3<T>) -> Self {
        Self::new([r0.to_array(), r1.to_array(), r2.to_array()])
    }

    #[inline]
    pub fn column(&self, c: usize) -> Vec3<T> {
        Vec3::new(self.m[0][c], self.m[1][c], self.m[2][c])
    }

    #[inline]
    pub fn row(&self, r: usize) -> Vec3<T> {
        Vec3::from_array(self.m[r])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for r in 0..3 {
            for c in 0..3 {
                t.m[c][r] = self.m[r][c];
            }
        }
        t
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Matrix inverse; `None` when the determinant magnitude is zero.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() {
            return None;
        }
        let m = &self.m;
        let inv_d = T::one() / d;
        let mut out = Self::zero();
        out.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_d;
        out.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_d;
        out.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_d;
        out.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_d;
        out.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_d;
        out.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_d;
        out.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_d;
        out.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_d;
        out.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_d;
        Some(out)
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            self.row(0).dot(v),
            self.row(1).dot(v),
            self.row(2).dot(v),
        )
    }

    pub fn mul_mat(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.m[r][k] * rhs.m[k][c];
                }
                out.m[r][c] = acc;
            }
        }
        out
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &Self) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.m[r][c] + rhs.m[r][c];
            }
        }
        Mat3 { m }
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for r in 0..3 {
            for c in 0..3 {
                out.m[r][c] *= s;
            }
        }
        out
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: Vec3<T>, b: Vec3<T>) -> Self {
        Self::new([
            [a.x * b.x, a.x * b.y, a.x * b.z],
            [a.y * b.x, a.y * b.y, a.y * b.z],
            [a.z * b.x, a.z * b.y, a.z * b.z],
        ])
    }

    /// True when `RᵀR = I` within `tol` and `det R ≈ +1` within `tol`.
    pub fn is_rotation(&self, tol: T) -> bool {
        let prod = self.transpose().mul_mat(self);
        let id = Self::identity();
        for r in 0..3 {
            for c in 0..3 {
                if (prod.m[r][c] - id.m[r][c]).abs() > tol {
                    return false;
                }
            }
        }
        (self.det() - T::one()).abs() <= tol
    }

    /// Rotation taking unit vector `from` onto unit vector `to` (Rodrigues).
    ///
    /// For anti-parallel inputs the rotation axis is chosen deterministically
    /// as an arbitrary unit vector orthogonal to `from`.
    pub fn rotation_between(from: Vec3<T>, to: Vec3<T>) -> Self {
        let c = from.dot(to);
        let axis = from.cross(to);
        let s2 = axis.norm_sq();
        let eps = T::of(1e-12);
        if s2 <= eps {
            if c > T::zero() {
                return Self::identity(); // already aligned
            }
            // Anti-parallel: rotate by π about any axis orthogonal to `from`.
            let helper = if from.x.abs() < T::of(0.9) {
                Vec3::new(T::one(), T::zero(), T::zero())
            } else {
                Vec3::new(T::zero(), T::one(), T::zero())
            };
            let axis = from.cross(helper).normalized().expect("orthogonal axis");
            return Self::rotation_axis_angle(axis, T::of(std::f64::consts::PI));
        }
        let s = s2.sqrt();
        let axis = axis / s;
        let angle = s.min(T::one()).asin();
        let angle = if c < T::zero() {
            T::of(std::f64::consts::PI) - angle
        } else {
            angle
        };
        Self::rotation_axis_angle(axis, angle)
    }

    /// Rotation about a unit axis by `angle` (Rodrigues formula).
    pub fn rotation_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let (sin, cos) = (angle.sin(), angle.cos());
        let one_c = T::one() - cos;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        Self::new([
            [
                cos + x * x * one_c,
                x * y * one_c - z * sin,
                x * z * one_c + y * sin,
            ],
            [
                y * x * one_c + z * sin,
                cos + y * y * one_c,
                y * z * one_c - x * sin,
            ],
            [
                z * x * one_c - y * sin,
                z * y * one_c + x * sin,
                cos + z * z * one_c,
            ],
        ])
    }
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching unit eigenvectors as
/// the columns of the returned matrix. The input must be symmetric; only the
/// upper triangle is trusted.
pub fn eigen_sym3<T: Real>(a: &Mat3<T>) -> ([T; 3], Mat3<T>) {
    let mut a = *a;
    // Symmetrize defensively so tiny asymmetries cannot bias the sweep.
    for r in 0..3 {
        for c in (r + 1)..3 {
            let avg = (a.m[r][c] + a.m[c][r]) * T::half();
            a.m[r][c] = avg;
            a.m[c][r] = avg;
        }
    }
    let mut v = Mat3::identity();
    for _sweep in 0..64 {
        let off = (a.m[0][1] * a.m[0][1] + a.m[0][2] * a.m[0][2] + a.m[1][2] * a.m[1][2]).sqrt();
        let scale = a.m[0][0]
            .abs()
            .max(a.m[1][1].abs())
            .max(a.m[2][2].abs())
            .max(T::min_positive_value());
        if off <= T::epsilon() * scale {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a.m[p][q];
            if apq == T::zero() {
                continue;
            }
            let app = a.m[p][p];
            let aqq = a.m[q][q];
            let theta = (aqq - app) / (T::two() * apq);
            // tan of the rotation angle, the numerically stable Jacobi choice
            let t = {
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                sign / (theta.abs() + (theta * theta + T::one()).sqrt())
            };
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;

            // A <- JᵀAJ applied in place.
            for k in 0..3 {
                let akp = a.m[k][p];
                let akq = a.m[k][q];
                a.m[k][p] = c * akp - s * akq;
                a.m[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a.m[p][k];
                let aqk = a.m[q][k];
                a.m[p][k] = c * apk - s * aqk;
                a.m[q][k] = s * apk + c * aqk;
            }
            // Accumulate eigenvectors: V <- VJ.
            for k in 0..3 {
                let vkp = v.m[k][p];
                let vkq = v.m[k][q];
                v.m[k][p] = c * vkp - s * vkq;
                v.m[k][q] = s * vkp + c * vkq;
            }
        }
    }
    let mut pairs = [
        (a.m[0][0], v.column(0)),
        (a.m[1][1], v.column(1)),
        (a.m[2][2], v.column(2)),
    ];
    pairs.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap_or(std::cmp::Ordering::Equal));
    let values = [pairs[0].0, pairs[1].0, pairs[2].0];
    let vectors = Mat3::from_columns(pairs[0].1, pairs[1].1, pairs[2].1);
    (values, vectors)
}
