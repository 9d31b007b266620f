//! Scalar abstraction used by every numeric kernel in the workspace.
//!
//! All geometry and learning code is generic over [`Real`], a blanket trait
//! that is satisfied by `f32` and `f64` (and any other IEEE-like float that
//! implements the `num-traits` hierarchy). Concrete aliases for the common
//! instantiations live at each crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar suitable for the geometry and ML kernels.
///
/// The trait is blanket-implemented; do not implement it manually. Write
/// kernels as `fn foo<T: Real>(...)` and instantiate them with `f32` or
/// `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `T`. Panics only if the value is not
    /// representable at all (never the case for finite literals on f32/f64).
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert into Real scalar")
    }

    /// Converts a `usize` (e.g. a count) into `T`.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize must convert into Real scalar")
    }

    /// Widens to `f64` for I/O and reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real scalar must widen to f64")
    }

    /// `2` as a scalar; frequent enough to deserve a helper.
    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }

    /// `1/2` as a scalar.
    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}
