//! Floating-point scalar abstraction shared by the geometric modules.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type used for embeddings, solver state and geometric diagnostics.
///
/// Implemented for `f32` and `f64`. Display must print the shortest
/// representation that parses back to the same value, which both primitive
/// float types guarantee.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to scalar")
    }

    /// Lossy conversion from a count.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("count converts to scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Dot product of two equal-length slices.
#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [T::zero(); 4];
    let xc = x.chunks_exact(4);
    let yc = y.chunks_exact(4);
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    let mut tail = T::zero();
    for (a, b) in xr.iter().zip(yr) {
        tail += *a * *b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += c * x`
#[inline]
pub fn axpy<T: Scalar>(c: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (b, a) in y.iter_mut().zip(x) {
        *b += c * *a;
    }
}

/// Squared Euclidean distance between two equal-length slices.
#[inline]
pub fn dist_sq<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = T::zero();
    for (a, b) in x.iter().zip(y) {
        let d = *a - *b;
        acc += d * d;
    }
    acc
}
