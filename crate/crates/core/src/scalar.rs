//! The floating-point scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Sum + Default + Debug + Display + LowerExp
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (cascade) summation. The reduction order depends only on the
/// length of the input, so results are reproducible across thread counts.
pub fn pairwise_sum<T, I>(values: I) -> T
where
    T: Copy + std::ops::Add<Output = T> + num_traits::Zero,
    I: IntoIterator<Item = T>,
{
    let v: Vec<T> = values.into_iter().collect();
    pairwise_slice(&v)
}

pub(crate) fn pairwise_slice<T>(v: &[T]) -> T
where
    T: Copy + std::ops::Add<Output = T> + num_traits::Zero,
{
    const BLOCK: usize = 32;
    if v.len() <= BLOCK {
        return v.iter().fold(T::zero(), |acc, &x| acc + x);
    }
    let mid = v.len() / 2;
    pairwise_slice(&v[..mid]) + pairwise_slice(&v[mid..])
}
