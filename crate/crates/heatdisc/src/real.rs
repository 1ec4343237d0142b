//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use realfft::FftNum;

/// Floating-point type the disc machinery can run on (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Default + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn cnt<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
