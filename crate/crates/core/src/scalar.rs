use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::float::TotalOrder;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric routines are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + TotalOrder
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Floor applied to probabilities before taking a logarithm.
    fn prob_floor() -> Self;

    /// Tolerance on `|sum(p) - 1|` for a vector of `classes` probabilities.
    fn simplex_tolerance(classes: usize) -> Self;

    /// Lossy conversion from `f64`; every value we convert is representable
    /// up to rounding.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    /// Unsigned key whose integer order matches `total_cmp`.
    fn order_key(self) -> u64;
}

impl Scalar for f64 {
    #[inline]
    fn prob_floor() -> Self {
        1e-300
    }

    fn simplex_tolerance(classes: usize) -> Self {
        (f64::EPSILON * classes as f64 * 4.0).max(1e-12)
    }

    #[inline]
    fn order_key(self) -> u64 {
        let b = self.to_bits();
        b ^ (((b as i64 >> 63) as u64) | (1 << 63))
    }
}

impl Scalar for f32 {
    #[inline]
    fn prob_floor() -> Self {
        f32::MIN_POSITIVE
    }

    fn simplex_tolerance(classes: usize) -> Self {
        f32::EPSILON * classes as f32 * 4.0
    }

    #[inline]
    fn order_key(self) -> u64 {
        let b = self.to_bits();
        (b ^ (((b as i32 >> 31) as u32) | (1 << 31))) as u64
    }
}
