//! Floating-point scalar abstraction.

use num_traits::{Float, FloatConst};
use rand::Rng;
use rustfft::FftNum;

/// Floating scalar the toolkit is generic over: `f32` or `f64`.
///
/// Bundles the numeric traits the numerics need (float arithmetic, FFT
/// support) with uniform sampling, plus lossless-enough conversion to and
/// from `f64` for constants and reported statistics.
pub trait Scalar: Float + FloatConst + FftNum {
    /// Cast an `f64` constant into this scalar type.
    fn of(x: f64) -> Self;

    /// Widen to `f64` for accumulation and reporting.
    fn to64(self) -> f64;

    /// Uniform sample in the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform sample in the half-open interval [0, 1).
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }
    #[inline]
    fn to64(self) -> f64 {
        self
    }
    #[inline]
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>().clamp(1e-16, 1.0 - 1e-16)
    }
    #[inline]
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

impl Scalar for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to64(self) -> f64 {
        f64::from(self)
    }
    #[inline]
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>().clamp(1e-7, 1.0 - 1e-7)
    }
    #[inline]
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}
