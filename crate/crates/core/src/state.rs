//! Grid wavefunctions and the measurement operations acting on them.
//!
//! States live on a symmetric uniform z grid (units of the photon
//! wavelength) and are kept normalized under the Riemann inner product
//! `sum |psi|^2 dz = 1` after every public operation. Detection locations
//! are sampled on the same grid, so kernels shift by whole grid steps and
//! translation is exact.

use num_complex::Complex;
use rand::Rng;

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::fftutil::{next_pow2, ChirpDft, FftCache};
use crate::grid::Grid;
use crate::optics::{
    capture_fraction, collapse_kernel, complement_kernel, ApertureProfile, CollapseKernel,
};
use crate::scalar::Scalar;

const NULL_POSTERIOR_NORM: f64 = 1e-12;

/// Harmonic trap, specified by its ground-state length scale `x0` (the
/// ground state is `psi ~ exp(-z^2 / 2 x0^2)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTrap<T> {
    pub length_scale: T,
}

impl<T: Scalar> HarmonicTrap<T> {
    pub fn new(length_scale: T) -> Result<Self> {
        if !(length_scale > T::zero()) {
            return Err(Error::InvalidGrid(
                "trap length scale must be positive".into(),
            ));
        }
        Ok(Self { length_scale })
    }
}

/// Result of one photon emission.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome<T> {
    pub detected: bool,
    /// Image position of the (possibly undetected) photon, snapped to the grid.
    pub location: T,
    pub posterior: WaveFunction<T>,
}

/// Position-space moments of `|psi|^2`.
#[derive(Debug, Clone, Copy)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
    pub iqr: T,
    /// Set when more than 10% of the variance mass sits in the outer 10% of
    /// the grid; the variance is then grid-size-dependent.
    pub tail_dominated: bool,
}

#[derive(Debug, Clone)]
pub struct WaveFunction<T> {
    grid: Grid<T>,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Scalar> WaveFunction<T> {
    pub fn new(grid: Grid<T>, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes on a {}-point grid",
                amplitudes.len(),
                grid.len()
            )));
        }
        let mut wf = Self { grid, amplitudes };
        wf.renormalize()?;
        Ok(wf)
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let amps = grid.points().map(f).collect();
        Self::new(grid, amps)
    }

    /// Gaussian packet whose position density has standard deviation `sigma`.
    pub fn gaussian(grid: Grid<T>, center: T, sigma: T) -> Result<Self> {
        Self::from_fn(grid, |z| {
            let d = z - center;
            Complex::new((-d * d / (T::of(4.0) * sigma * sigma)).exp(), T::zero())
        })
    }

    /// Trap ground state, `psi ~ exp(-z^2 / 2 x0^2)` (position density
    /// standard deviation `x0 / sqrt(2)`).
    pub fn ground_state(grid: Grid<T>, trap: &HarmonicTrap<T>) -> Result<Self> {
        let x0 = trap.length_scale;
        Self::from_fn(grid, |z| {
            Complex::new((-z * z / (T::of(2.0) * x0 * x0)).exp(), T::zero())
        })
    }

    /// Flat (uniform) state over the whole grid.
    pub fn flat(grid: Grid<T>) -> Result<Self> {
        Self::from_fn(grid, |_| Complex::new(T::one(), T::zero()))
    }

    /// Top-hat state of the given full width.
    pub fn square(grid: Grid<T>, center: T, width: T) -> Result<Self> {
        let half = width * T::of(0.5);
        Self::from_fn(grid, |z| {
            if (z - center).abs() <= half {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    /// Real state with the prescribed position density.
    pub fn from_density(density: &GridDensity<T>) -> Result<Self> {
        let amps = density
            .values
            .iter()
            .map(|&p| Complex::new(p.max(T::zero()).sqrt(), T::zero()))
            .collect();
        Self::new(density.grid, amps)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Riemann norm squared, `sum |psi|^2 dz`.
    pub fn norm_sq(&self) -> T {
        let mut acc = T::zero();
        for a in &self.amplitudes {
            acc = acc + a.norm_sqr();
        }
        acc * self.grid.step()
    }

    fn renormalize(&mut self) -> Result<T> {
        let n2 = self.norm_sq();
        let n = n2.sqrt();
        if !(n.to64() > NULL_POSTERIOR_NORM) {
            return Err(Error::NullPosterior { norm: n.to64() });
        }
        let inv = T::one() / n;
        for a in self.amplitudes.iter_mut() {
            *a = *a * inv;
        }
        Ok(n)
    }

    /// Position density `|psi|^2`.
    pub fn density(&self) -> GridDensity<T> {
        let values = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        GridDensity::new(self.grid, values)
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.amplitudes.iter().zip(other.amplitudes.iter()) {
            acc = acc + a.conj() * *b;
        }
        acc * Complex::new(self.grid.step(), T::zero())
    }

    /// Overlap magnitude, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm()
    }

    /// Mean, variance, and IQR of the position density, with a tail flag.
    pub fn moments(&self) -> Moments<T> {
        let density = self.density();
        let mean = density.mean();
        let n = self.grid.len();
        let edge = n / 10;
        let mut var = T::zero();
        let mut var_outer = T::zero();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let d = self.grid.at(i) - mean;
            let contrib = a.norm_sqr() * d * d * self.grid.step();
            var = var + contrib;
            if i < edge || i >= n - edge {
                var_outer = var_outer + contrib;
            }
        }
        Moments {
            mean,
            variance: var,
            iqr: density.iqr(),
            tail_dominated: var_outer > T::of(0.1) * var,
        }
    }

    /// Multiply by the kernel centered at `a` (snapped to the grid) and
    /// renormalize. Fails with a null posterior when the product norm
    /// underflows 1e-12, signalling a detection incompatible with the state.
    pub fn apply_collapse(&self, kernel: &CollapseKernel<T>, a: T) -> Result<Self> {
        let rel = (kernel.grid.step() - self.grid.step()).abs();
        if rel > self.grid.step() * T::of(1e-9) {
            return Err(Error::GridMismatch(
                "kernel and state grids must share the same spacing".into(),
            ));
        }
        // kernel index for z_j - a: base + j
        let shift = self.grid.steps_from_zero(a);
        let base = ((self.grid.min() - kernel.grid.min()) / self.grid.step())
            .round()
            .to64() as i64
            - shift;
        let mut amps = Vec::with_capacity(self.grid.len());
        for (j, psi) in self.amplitudes.iter().enumerate() {
            let ik = base + j as i64;
            let k = if ik >= 0 && (ik as usize) < kernel.grid.len() {
                kernel.values[ik as usize]
            } else {
                Complex::new(T::zero(), T::zero())
            };
            amps.push(*psi * k);
        }
        let mut wf = Self {
            grid: self.grid,
            amplitudes: amps,
        };
        wf.renormalize()?;
        Ok(wf)
    }

    /// Mean wavenumber `<p>` from the central-difference gradient,
    /// `Im sum psi* (psi_{j+1} - psi_{j-1}) / (2 dz) dz`.
    pub fn momentum_mean(&self) -> T {
        let n = self.grid.len();
        let mut acc = T::zero();
        for j in 1..n - 1 {
            let grad = self.amplitudes[j + 1] - self.amplitudes[j - 1];
            acc = acc + (self.amplitudes[j].conj() * grad).im;
        }
        acc * T::of(0.5)
    }

    /// Exact translation by a whole number of grid steps (content shifted,
    /// vacated points zero-filled). Positive steps move the state towards
    /// larger z. Fails with a null posterior if everything is shifted off.
    pub fn translate_steps(&self, steps: i64) -> Result<Self> {
        let n = self.grid.len() as i64;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); self.grid.len()];
        for j in 0..n {
            let src = j - steps;
            if src >= 0 && src < n {
                amps[j as usize] = self.amplitudes[src as usize];
            }
        }
        let mut wf = Self {
            grid: self.grid,
            amplitudes: amps,
        };
        wf.renormalize()?;
        Ok(wf)
    }

    /// Multiply by the plane-wave phase `exp(i k z)` (a momentum boost by
    /// `k`); does not change the position density.
    pub fn boost(&self, k: T) -> Self {
        let amps = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| *a * Complex::from_polar(T::one(), k * self.grid.at(j)))
            .collect();
        Self {
            grid: self.grid,
            amplitudes: amps,
        }
    }

    pub fn write_checkpoint<W: std::io::Write>(&self, w: W) -> Result<()> {
        crate::io::write_checkpoint(w, &self.grid, &self.amplitudes)
    }

    pub fn read_checkpoint<R: std::io::Read>(r: R) -> Result<Self> {
        let (grid, amps) = crate::io::read_checkpoint(r)?;
        Self::new(grid, amps)
    }
}

/// Born-rule density of the imaged photon position for a given kernel:
/// `P(a) ~ int |K(z - a)|^2 |psi(z)|^2 dz`, for every grid position `a`,
/// via one FFT cross-correlation. Returned normalized over the grid.
pub fn detection_distribution<T: Scalar>(
    psi: &WaveFunction<T>,
    kernel: &CollapseKernel<T>,
) -> Result<GridDensity<T>> {
    let plan = KernelCorrelator::new(*psi.grid(), kernel)?;
    let mut cache = FftCache::new();
    let rho_fft = plan.density_fft(psi, &mut cache);
    let mut density = plan.correlate(&rho_fft, &mut cache);
    density.normalize();
    Ok(density)
}

/// Precomputed FFT machinery for correlating `|psi|^2` against a fixed
/// kernel intensity on a fixed grid.
struct KernelCorrelator<T: Scalar> {
    grid: Grid<T>,
    fft_len: usize,
    /// conj(FFT(intensity)) zero-padded.
    intensity_fft: Vec<Complex<T>>,
    base: i64,
}

impl<T: Scalar> KernelCorrelator<T> {
    fn new(grid: Grid<T>, kernel: &CollapseKernel<T>) -> Result<Self> {
        let rel = (kernel.grid.step() - grid.step()).abs();
        if rel > grid.step() * T::of(1e-9) {
            return Err(Error::GridMismatch(
                "kernel and state grids must share the same spacing".into(),
            ));
        }
        let fft_len = next_pow2(grid.len() + kernel.grid.len());
        let mut intensity = vec![Complex::new(T::zero(), T::zero()); fft_len];
        for (i, v) in kernel.values.iter().enumerate() {
            intensity[i] = Complex::new(v.norm_sqr(), T::zero());
        }
        FftCache::new().forward(&mut intensity);
        for v in intensity.iter_mut() {
            *v = v.conj();
        }
        // z_m - a_j = (m - j) dz, so the kernel index is base + (m - j)
        // with base the kernel's zero position.
        let base = (-kernel.grid.min() / grid.step()).round().to64() as i64;
        Ok(Self {
            grid,
            fft_len,
            intensity_fft: intensity,
            base,
        })
    }

    fn density_fft(&self, psi: &WaveFunction<T>, cache: &mut FftCache<T>) -> Vec<Complex<T>> {
        let mut rho = vec![Complex::new(T::zero(), T::zero()); self.fft_len];
        for (i, a) in psi.amplitudes().iter().enumerate() {
            rho[i] = Complex::new(a.norm_sqr(), T::zero());
        }
        cache.forward(&mut rho);
        rho
    }

    /// Unnormalized detection density `P(a_j) = dz sum_m rho_m I[base+m-j]`.
    fn correlate(&self, rho_fft: &[Complex<T>], cache: &mut FftCache<T>) -> GridDensity<T> {
        let mut buf: Vec<Complex<T>> = rho_fft
            .iter()
            .zip(self.intensity_fft.iter())
            .map(|(r, i)| *r * *i)
            .collect();
        cache.inverse(&mut buf);
        let scale = self.grid.step() / T::of(self.fft_len as f64);
        let n = self.grid.len() as i64;
        let values: Vec<T> = (0..n)
            .map(|j| {
                let lag = (j - self.base).rem_euclid(self.fft_len as i64) as usize;
                (buf[lag].re * scale).max(T::zero())
            })
            .collect();
        GridDensity::new(self.grid, values)
    }

    /// `sum_j P(a_j) da`, the raw Born mass before normalization.
    fn total(&self, density: &GridDensity<T>) -> T {
        let mut acc = T::zero();
        for &v in &density.values {
            acc = acc + v;
        }
        acc * self.grid.step()
    }
}

/// Imaging pipeline for repeated emissions: both kernels, their correlators,
/// and the capture fraction, all precomputed for one grid.
pub struct PhotonImaging<T: Scalar> {
    pub detected: CollapseKernel<T>,
    pub undetected: CollapseKernel<T>,
    pub eta: T,
    detected_corr: KernelCorrelator<T>,
    undetected_corr: KernelCorrelator<T>,
    /// mirrors * (delta_phi / 2 pi) / lambda converts the raw Born mass of
    /// the detected channel into a probability (Parseval bookkeeping).
    geometry: T,
    cache: FftCache<T>,
}

impl<T: Scalar> PhotonImaging<T> {
    pub fn new(aperture: &ApertureProfile<T>, grid: &Grid<T>, mirrors: u32) -> Result<Self> {
        let detected = collapse_kernel(aperture, grid)?;
        let undetected = complement_kernel(aperture, grid)?;
        let eta = capture_fraction(aperture, mirrors);
        let detected_corr = KernelCorrelator::new(*grid, &detected)?;
        let undetected_corr = KernelCorrelator::new(*grid, &undetected)?;
        let geometry =
            T::of(mirrors as f64) * aperture.delta_phi / T::TAU() / aperture.wavelength;
        Ok(Self {
            detected,
            undetected,
            eta,
            detected_corr,
            undetected_corr,
            geometry,
            cache: FftCache::new(),
        })
    }

    /// Detection probability computed from the state via the Born mass of
    /// the detected channel. Equals the capture fraction for every state
    /// whose support keeps the shifted kernels on the grid.
    pub fn detection_probability(&mut self, psi: &WaveFunction<T>) -> T {
        let rho = self.detected_corr.density_fft(psi, &mut self.cache);
        let density = self.detected_corr.correlate(&rho, &mut self.cache);
        self.detected_corr.total(&density) * self.geometry
    }

    /// One spontaneous emission: detected with the state-derived detection
    /// probability, the image position sampled from the matching channel's
    /// Born density, and the corresponding collapse applied.
    pub fn emit_photon<R: Rng + ?Sized>(
        &mut self,
        psi: &WaveFunction<T>,
        rng: &mut R,
    ) -> Result<MeasurementOutcome<T>> {
        let rho = self.detected_corr.density_fft(psi, &mut self.cache);
        let da = self.detected_corr.correlate(&rho, &mut self.cache);
        let p_detect = self.detected_corr.total(&da) * self.geometry;
        let detected = T::unit(rng) < p_detect;
        self.finish_emission(psi, detected, da, &rho, rng)
    }

    /// Same emission flow with an externally prescribed detection
    /// probability (post-selected ensembles, where the effective loss rate
    /// is a simulation knob rather than the raw capture fraction).
    pub fn emit_with_probability<R: Rng + ?Sized>(
        &mut self,
        psi: &WaveFunction<T>,
        p_detect: T,
        rng: &mut R,
    ) -> Result<MeasurementOutcome<T>> {
        let detected = T::unit(rng) < p_detect;
        let rho = self.detected_corr.density_fft(psi, &mut self.cache);
        let da = if detected {
            self.detected_corr.correlate(&rho, &mut self.cache)
        } else {
            GridDensity::new(self.detected.grid, vec![T::zero(); self.detected.grid.len()])
        };
        self.finish_emission(psi, detected, da, &rho, rng)
    }

    fn finish_emission<R: Rng + ?Sized>(
        &mut self,
        psi: &WaveFunction<T>,
        detected: bool,
        detected_density: GridDensity<T>,
        rho_fft: &[Complex<T>],
        rng: &mut R,
    ) -> Result<MeasurementOutcome<T>> {
        let (kernel, mut density) = if detected {
            (&self.detected, detected_density)
        } else {
            let db = self.undetected_corr.correlate(rho_fft, &mut self.cache);
            (&self.undetected, db)
        };
        density.normalize();
        let a = density.grid.at(density.grid.nearest(density.sample(rng)));
        let posterior = psi.apply_collapse(kernel, a)?;
        Ok(MeasurementOutcome {
            detected,
            location: a,
            posterior,
        })
    }
}

/// Exact quarter-period map of the harmonic oscillator: a scaled Fourier
/// rotation exchanging the position and momentum densities,
///
/// `psi'(x) = e^{-i pi/4} / sqrt(2 pi x0^2) int psi(x') exp(-i x x' / x0^2) dx'`.
///
/// Evaluated as an exact chirp transform on the grid, so no time stepping is
/// involved. Requires a symmetric grid (zero on the center point).
pub struct QuarterPeriodPlan<T: Scalar> {
    grid: Grid<T>,
    plan: ChirpDft<T>,
    prefactor: Complex<T>,
}

impl<T: Scalar> QuarterPeriodPlan<T> {
    pub fn new(grid: Grid<T>, trap: &HarmonicTrap<T>) -> Result<Self> {
        let c = grid.len() / 2;
        if grid.at(c).abs() > grid.step() * T::of(1e-9) {
            return Err(Error::GridMismatch(
                "quarter-period evolution needs a symmetric grid".into(),
            ));
        }
        let x0 = trap.length_scale;
        let theta = grid.step() * grid.step() / (x0 * x0);
        let plan = ChirpDft::new(theta, grid.len(), c, grid.len(), c);
        let mag = grid.step() / (T::TAU().sqrt() * x0);
        let prefactor = Complex::from_polar(mag, -T::FRAC_PI_4());
        Ok(Self {
            grid,
            plan,
            prefactor,
        })
    }

    /// Apply the map. Returns the evolved (renormalized) state and the mass
    /// lost off the grid edge (momentum content the output window cannot
    /// hold); callers treat a lost mass above their threshold as an aliasing
    /// warning.
    pub fn apply(&mut self, psi: &WaveFunction<T>) -> Result<(WaveFunction<T>, T)> {
        if !psi.grid.same_layout(&self.grid) {
            return Err(Error::GridMismatch(
                "state grid differs from plan grid".into(),
            ));
        }
        let mut amps = self.plan.apply(psi.amplitudes());
        for a in amps.iter_mut() {
            *a = *a * self.prefactor;
        }
        let mut wf = WaveFunction {
            grid: psi.grid,
            amplitudes: amps,
        };
        let norm = wf.renormalize()?;
        let lost = (T::one() - norm * norm).max(T::zero());
        Ok((wf, lost))
    }
}

/// One-off quarter-period evolution.
pub fn quarter_period<T: Scalar>(
    psi: &WaveFunction<T>,
    trap: &HarmonicTrap<T>,
) -> Result<(WaveFunction<T>, T)> {
    QuarterPeriodPlan::new(*psi.grid(), trap)?.apply(psi)
}

/// Wigner quasi-probability distribution on the grid.
#[derive(Debug, Clone)]
pub struct WignerGrid<T> {
    pub x_grid: Grid<T>,
    pub p_grid: Grid<T>,
    /// Row-major `[x_index][p_index]`.
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> WignerGrid<T> {
    /// `int int W dX dP` (Riemann).
    pub fn total_mass(&self) -> T {
        let cell = self.x_grid.step() * self.p_grid.step();
        let mut acc = T::zero();
        for row in &self.values {
            for &v in row {
                acc = acc + v;
            }
        }
        acc * cell
    }

    /// `int W dP` per X point.
    pub fn position_marginal(&self) -> Vec<T> {
        self.values
            .iter()
            .map(|row| {
                let mut acc = T::zero();
                for &v in row {
                    acc = acc + v;
                }
                acc * self.p_grid.step()
            })
            .collect()
    }

    /// `int W dX` per P point.
    pub fn momentum_marginal(&self) -> Vec<T> {
        let np = self.p_grid.len();
        let mut out = vec![T::zero(); np];
        for row in &self.values {
            for (o, &v) in out.iter_mut().zip(row.iter()) {
                *o = *o + v;
            }
        }
        for o in out.iter_mut() {
            *o = *o * self.x_grid.step();
        }
        out
    }

    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(T::neg_infinity(), T::max)
    }
}

/// Wigner function `W(X, P) = (1/pi) int psi*(X+y) psi(X-y) e^{2iPy} dy`
/// with `[X, P] = i`. X points are every `x_stride`-th grid point; the P
/// grid is the conjugate grid with spacing `pi / (n dz)`. The position
/// marginal reproduces `|psi(X)|^2` exactly on the X points.
pub fn wigner<T: Scalar>(psi: &WaveFunction<T>, x_stride: usize) -> Result<WignerGrid<T>> {
    if x_stride == 0 {
        return Err(Error::InvalidGrid("x_stride must be positive".into()));
    }
    let grid = *psi.grid();
    let n = grid.len();
    if !n.is_multiple_of(4) {
        return Err(Error::InvalidGrid(
            "wigner needs a grid length divisible by 4".into(),
        ));
    }
    let half = n / 2;
    let dz = grid.step();
    let dp = T::PI() / (dz * T::of(n as f64));
    let p_grid = Grid::new(-dp * T::of(half as f64), dp, n)?;
    let x_count = n / x_stride;
    let x_grid = Grid::new(grid.min(), dz * T::of(x_stride as f64), x_count)?;

    let amps = psi.amplitudes();
    let mut cache = FftCache::new();
    let scale = dz / T::PI();
    let mut values = Vec::with_capacity(x_count);
    for xc in 0..x_count {
        let j = xc * x_stride;
        let mut row_c = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, slot) in row_c.iter_mut().enumerate() {
            let di = i as i64 - half as i64;
            let plus = j as i64 + di;
            let minus = j as i64 - di;
            if plus < 0 || plus >= n as i64 || minus < 0 || minus >= n as i64 {
                continue;
            }
            let c = amps[plus as usize].conj() * amps[minus as usize];
            // (-1)^i folds the centered phase into a plain inverse FFT
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            *slot = c * Complex::new(sign, T::zero());
        }
        cache.inverse(&mut row_c);
        let row: Vec<T> = (0..n)
            .map(|m| {
                let sign = if m % 2 == 0 { T::one() } else { -T::one() };
                row_c[m].re * sign * scale
            })
            .collect();
        values.push(row);
    }
    Ok(WignerGrid {
        x_grid,
        p_grid,
        values,
    })
}
