//! Axis-aligned bounding boxes.

use crate::math::Vec3;
use crate::scalar::Real;

/// Axis-aligned bounding box (inclusive on both ends).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    /// Box spanning exactly the given corners (caller guarantees min ≤ max).
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    /// Smallest box containing all points; `None` for an empty iterator.
    pub fn from_points<I: IntoIterator<Item = Vec3<T>>>(points: I) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut b = Self::new(first, first);
        for p in iter {
            b.min = b.min.min(p);
            b.max = b.max.max(p);
        }
        Some(b)
    }

    #[inline]
    pub fn extent(&self) -> Vec3<T> {
        self.max - self.min
    }

    #[inline]
    pub fn diagonal(&self) -> T {
        self.extent().norm()
    }

    #[inline]
    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * T::half()
    }

    /// Longest edge of the box.
    #[inline]
    pub fn max_extent(&self) -> T {
        let e = self.extent();
        e.x.max(e.y).max(e.z)
    }

    #[inline]
    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Grows the box by `margin` on every side.
    pub fn expanded(&self, margin: T) -> Self {
        let m = Vec3::splat(margin);
        Self::new(self.min - m, self.max + m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_points_and_queries() {
        let pts = [
            Vec3::<f64>::new(1.0, -2.0, 3.0),
            Vec3::new(-1.0, 4.0, 0.0),
            Vec3::new(0.5, 0.0, 5.0),
        ];
        let b = Aabb::from_points(pts).unwrap();
        assert_eq!(b.min, Vec3::new(-1.0, -2.0, 0.0));
        assert_eq!(b.max, Vec3::new(1.0, 4.0, 5.0));
        assert!(b.contains(Vec3::new(0.0, 0.0, 1.0)));
        assert!(!b.contains(Vec3::new(0.0, 0.0, 5.1)));
        assert_eq!(b.max_extent(), 6.0);
        assert!(Aabb::<f64>::from_points(std::iter::empty()).is_none());
    }

    #[test]
    fn expansion() {
        let b = Aabb::<f64>::new(Vec3::zero(), Vec3::splat(1.0)).expanded(0.5);
        assert_eq!(b.min, Vec3::splat(-0.5));
        assert_eq!(b.max, Vec3::splat(1.5));
    }
}
