//! Scalar abstraction for pixel intensities and geometry.

use std::fmt::Debug;

/// Floating-point scalar the image pipeline is generic over: f32 or f64.
///
/// Window statistics always accumulate in f64 internally (see
/// [`crate::integral`]); this trait bounds the storage and interface type.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + num_traits::NumCast + Debug + Send + Sync + 'static
{
    /// Lossless widening to f64 for accumulation.
    fn to_f64(self) -> f64;

    /// Narrowing conversion from f64 (rounds for f32).
    fn from_f64(v: f64) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
}
