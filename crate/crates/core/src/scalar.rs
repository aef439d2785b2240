//! Scalar abstraction shared by every numerical module.
//!
//! All algorithms are written once against [`Real`] and instantiated for
//! `f64` (the production precision) and `f32` (cheap exploratory runs).
//! Tolerances quoted throughout the crate assume `f64`.

use std::fmt::{Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable by the laboratory.
///
/// `FftNum` brings `num_traits::Signed` along, whose `abs`/`signum` clash with
/// the `Float` methods of the same name; call them as `Float::abs(x)` in
/// generic code.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Display
    + LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
    + crate::linalg::DenseLinalg
{
    /// Converts an `f64` literal. Infallible for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `sqrt(Σ|z|² · weight)`.
pub(crate) fn weighted_norm<T: Real>(values: &[C<T>], weight: T) -> T {
    let mut acc = T::zero();
    for z in values {
        acc = acc + z.norm_sqr();
    }
    (acc * weight).sqrt()
}

pub(crate) fn max_abs<T: Real>(values: &[C<T>]) -> T {
    values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}
