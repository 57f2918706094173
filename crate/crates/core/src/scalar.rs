//! Scalar abstraction: everything in the crate is generic over the
//! floating-point type through [`Scalar`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar for all grid math: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Convert from an `f64` constant. Panics only for values a float type
    /// cannot represent at all, which never happens for finite literals.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable")
    }

    /// Lossy view as `f64`, mainly for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize not representable")
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
