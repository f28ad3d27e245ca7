//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the library is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Base step for central finite differences, scaled by `max(1, |x_i|)`.
    const FD_STEP: f64;
    /// Relative slack used when checking that a step divides a horizon.
    const GRID_SLACK: f64;
}

impl Scalar for f64 {
    const FD_STEP: f64 = 1e-6;
    const GRID_SLACK: f64 = 1e-9;
}

impl Scalar for f32 {
    const FD_STEP: f64 = 5e-3;
    const GRID_SLACK: f64 = 1e-4;
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("f64 literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn from_count<T: Scalar>(value: usize) -> T {
    T::from_usize(value).expect("count representable in scalar type")
}

/// Infinity norm of a vector.
pub fn norm_inf<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Infinity-norm distance between two vectors of equal length.
pub fn dist_inf<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_on_small_vectors() {
        assert_eq!(norm_inf(&[1.0_f64, -3.0, 2.0]), 3.0);
        assert_eq!(norm_inf::<f64>(&[]), 0.0);
        assert_eq!(dist_inf(&[1.0_f32, 1.0], &[0.5, 3.0]), 2.0);
    }
}
