//! Thin wrappers over rustfft plus a chirp (Bluestein) transform for scaled
//! discrete Fourier sums whose frequency step is not tied to the grid length.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Scalar;

pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Caches FFT plans; reuse one per computation scope.
pub struct FftCache<T: Scalar> {
    planner: FftPlanner<T>,
}

impl<T: Scalar> Default for FftCache<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> FftCache<T> {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
        }
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&mut self, data: &mut [Complex<T>]) {
        self.planner.plan_fft_forward(data.len()).process(data);
    }

    /// Unnormalized inverse transform, in place (scale by 1/len to invert).
    pub fn inverse(&mut self, data: &mut [Complex<T>]) {
        self.planner.plan_fft_inverse(data.len()).process(data);
    }
}

/// Precomputed plan for the centered chirp sum
///
/// `Y_v = sum_u x_u exp(-i theta (u - c_in)(v - c_out))`,
///
/// `u = 0..n_in`, `v = 0..n_out`, for arbitrary real `theta`. Evaluated
/// exactly (to rounding) via Bluestein's identity
/// `u'v' = [u'^2 + v'^2 - (u' - v')^2] / 2` and one linear convolution.
pub struct ChirpDft<T: Scalar> {
    n_in: usize,
    n_out: usize,
    c_in: usize,
    c_out: usize,
    theta: T,
    fft_len: usize,
    kernel_fft: Vec<Complex<T>>,
    cache: FftCache<T>,
}

impl<T: Scalar> ChirpDft<T> {
    pub fn new(theta: T, n_in: usize, c_in: usize, n_out: usize, c_out: usize) -> Self {
        let fft_len = next_pow2(2 * n_in + n_out);
        let mut cache = FftCache::new();

        // Convolution kernel D'_k = exp(+i theta (dc - (k + m_lo))^2 / 2)
        // with m_lo = 1 - n_in and dc = c_out - c_in.
        let dc = c_out as i64 - c_in as i64;
        let m_lo = 1 - n_in as i64;
        let mut kernel = vec![Complex::new(T::zero(), T::zero()); fft_len];
        for (k, slot) in kernel.iter_mut().enumerate().take(n_in + n_out - 1) {
            let m = k as i64 + m_lo;
            let w = T::of((dc - m) as f64);
            let phase = theta * w * w * T::of(0.5);
            *slot = Complex::from_polar(T::one(), phase);
        }
        cache.forward(&mut kernel);

        Self {
            n_in,
            n_out,
            c_in,
            c_out,
            theta,
            fft_len,
            kernel_fft: kernel,
            cache,
        }
    }

    pub fn apply(&mut self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.n_in);
        let half = T::of(0.5);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.fft_len];
        for (j, (&xj, slot)) in x.iter().zip(buf.iter_mut()).enumerate() {
            let u = T::of(j as f64 - self.c_in as f64);
            let phase = -self.theta * u * u * half;
            *slot = xj * Complex::from_polar(T::one(), phase);
        }
        self.cache.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(self.kernel_fft.iter()) {
            *b = *b * *k;
        }
        self.cache.inverse(&mut buf);

        let scale = T::one() / T::of(self.fft_len as f64);
        let mut out = Vec::with_capacity(self.n_out);
        for v in 0..self.n_out {
            let vp = T::of(v as f64 - self.c_out as f64);
            let phase = -self.theta * vp * vp * half;
            let idx = v + self.n_in - 1;
            out.push(buf[idx] * Complex::from_polar(scale, phase));
        }
        out
    }
}
