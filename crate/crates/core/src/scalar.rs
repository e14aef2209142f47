//! Floating-point abstraction for the numeric core.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type underlying all vector-space math: `f32` or `f64`.
///
/// The library is generic so the numeric core can run in either precision;
/// the CLI and the persisted model formats are pinned to `f64` (see the
/// type aliases at the crate root).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from a count. Lossy above the mantissa range.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(|| Self::infinity())
    }

    /// Conversion from `f64`, for constants and parsed values.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(|| Self::nan())
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}
