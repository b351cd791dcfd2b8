use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. Third-order tensor entries are often
/// around `1e-4` to `1e-5` and need `f64`; `f32` is supported for throughput experiments where a coarse
/// verdict is enough.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + Sum
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon as a plain `f64`, handy for tolerance arithmetic.
    fn eps_f64() -> f64 {
        Self::epsilon().to_f64().unwrap_or(f64::EPSILON)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts `T` to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn two_pi<T: Real>() -> T {
    T::PI() + T::PI()
}

pub(crate) fn max_abs<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub(crate) fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let s: T = xs.iter().copied().sum();
    s / lit::<T>(xs.len() as f64)
}
