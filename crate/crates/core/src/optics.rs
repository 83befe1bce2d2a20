//! Collapse kernels from imaging apertures.
//!
//! A photodetection at image position `a` multiplies the atomic wavefunction
//! by `A(z - a)`, where the kernel is the diffraction integral of the
//! weighted aperture amplitude over emission direction `xi = cos(theta)`:
//!
//! `A(z) = int_{-1}^{1} chi(xi) exp(i k z xi) dxi`,  `chi = t sqrt(f)`,
//!
//! with `f(xi) = (3/4)(1 - xi^2)` the dipole emission pattern and `t(xi)`
//! the complex mask transmission. Engineering `t` engineers the collapse.
//! Lengths are measured in units of the photon wavelength unless an aperture
//! declares otherwise.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fftutil::{next_pow2, FftCache};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// Dipole angular emission pattern, normalized so the integral over
/// `xi in [-1, 1]` is exactly 1 (the azimuthal factor is carried separately).
#[derive(Debug, Clone, Copy, Default)]
pub struct EmissionPattern;

impl EmissionPattern {
    #[inline]
    pub fn value<T: Scalar>(xi: T) -> T {
        T::of(0.75) * (T::one() - xi * xi).max(T::zero())
    }

    /// Exact integral over the full emission sphere in these conventions.
    pub fn total<T: Scalar>() -> T {
        T::one()
    }
}

/// Complex transmission mask over emission direction plus the geometry
/// needed for capture-fraction bookkeeping.
#[derive(Debug, Clone)]
pub struct ApertureProfile<T> {
    pub xi: Grid<T>,
    pub transmission: Vec<Complex<T>>,
    /// Azimuthal window per mirror, radians.
    pub delta_phi: T,
    /// Polar arc spanned by each mirror, radians.
    pub mirror_arc: T,
    /// Photon wavelength; the length unit of every grid (default 1).
    pub wavelength: T,
    /// Declared capture interval in xi; `t = 0` outside it.
    pub capture: (T, T),
}

impl<T: Scalar> ApertureProfile<T> {
    pub fn new(
        xi: Grid<T>,
        transmission: Vec<Complex<T>>,
        delta_phi: T,
        mirror_arc: T,
        wavelength: T,
        capture: (T, T),
    ) -> Result<Self> {
        if transmission.len() != xi.len() {
            return Err(Error::InvalidAperture(format!(
                "{} transmission samples on a {}-point grid",
                transmission.len(),
                xi.len()
            )));
        }
        if !(delta_phi > T::zero()) || delta_phi > T::of(std::f64::consts::TAU + 1e-12) {
            return Err(Error::InvalidAperture(format!(
                "delta_phi = {} outside (0, 2 pi]",
                delta_phi.to64()
            )));
        }
        if !(wavelength > T::zero()) {
            return Err(Error::InvalidAperture("wavelength must be positive".into()));
        }
        let eps = T::of(1e-9);
        if xi.min() < -T::one() - eps || xi.max() > T::one() + eps {
            return Err(Error::InvalidAperture(
                "xi grid must lie within [-1, 1]".into(),
            ));
        }
        if !(capture.0 < capture.1) || capture.0 < -T::one() - eps || capture.1 > T::one() + eps {
            return Err(Error::InvalidAperture(
                "capture region must be an interval inside [-1, 1]".into(),
            ));
        }
        let tol = T::of(1.0 + 1e-9);
        for (i, t) in transmission.iter().enumerate() {
            let x = xi.at(i);
            if t.norm() > tol {
                return Err(Error::InvalidAperture(format!(
                    "|t| = {} > 1 at xi = {}",
                    t.norm().to64(),
                    x.to64()
                )));
            }
            if (x < capture.0 || x > capture.1) && t.norm() > T::of(1e-9) {
                return Err(Error::InvalidAperture(format!(
                    "t nonzero at xi = {} outside the capture region",
                    x.to64()
                )));
            }
        }
        Ok(Self {
            xi,
            transmission,
            delta_phi,
            mirror_arc,
            wavelength,
            capture,
        })
    }

    #[inline]
    pub fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }

    /// `chi = t sqrt(f)`, the effective detected-mode amplitude.
    pub fn chi(&self) -> Vec<Complex<T>> {
        self.transmission
            .iter()
            .enumerate()
            .map(|(i, t)| *t * EmissionPattern::value(self.xi.at(i)).sqrt())
            .collect()
    }

    /// `chi' = sqrt(f) (1 - t)`, the undetected-mode amplitude.
    pub fn chi_complement(&self) -> Vec<Complex<T>> {
        self.transmission
            .iter()
            .enumerate()
            .map(|(i, t)| {
                (Complex::new(T::one(), T::zero()) - *t)
                    * EmissionPattern::value(self.xi.at(i)).sqrt()
            })
            .collect()
    }

    /// Trapezoid integral of `|chi|^2` over the grid.
    pub fn chi_norm_sq(&self) -> T {
        let chi = self.chi();
        let mut acc = T::zero();
        for (i, c) in chi.iter().enumerate() {
            acc = acc + c.norm_sqr() * self.xi.trapezoid_weight(i);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Detected,
    Undetected,
}

/// A collapse kernel sampled on a uniform z grid.
#[derive(Debug, Clone)]
pub struct CollapseKernel<T> {
    pub grid: Grid<T>,
    pub values: Vec<Complex<T>>,
    pub kind: KernelKind,
    /// Largest edge amplitude relative to the peak; kernels above 1e-6 are
    /// deliberately long-tailed and their truncation shows up here.
    pub edge_fraction: T,
}

impl<T: Scalar> CollapseKernel<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>, kind: KernelKind) -> Self {
        assert_eq!(grid.len(), values.len());
        let peak = values.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        let edge = values[0].norm().max(values[grid.len() - 1].norm());
        let edge_fraction = if peak > T::zero() { edge / peak } else { T::zero() };
        Self {
            grid,
            values,
            kind,
            edge_fraction,
        }
    }

    pub fn from_fn(grid: Grid<T>, kind: KernelKind, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = grid.points().map(f).collect();
        Self::new(grid, values, kind)
    }

    pub fn is_long_tailed(&self) -> bool {
        self.edge_fraction > T::of(1e-6)
    }

    /// `|A(z)|^2` per grid point.
    pub fn intensity(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Trapezoid integral of `|A|^2 dz`.
    pub fn l2_mass(&self) -> T {
        let mut acc = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            acc = acc + v.norm_sqr() * self.grid.trapezoid_weight(i);
        }
        acc
    }

    /// Relative L2 distance between unit-normalized shapes, insensitive to
    /// overall amplitude and global phase.
    pub fn shape_distance(&self, other: &Self) -> T {
        let na = self.l2_mass().sqrt();
        let nb = other.l2_mass().sqrt();
        let mut inner = Complex::new(T::zero(), T::zero());
        for (i, (a, b)) in self.values.iter().zip(other.values.iter()).enumerate() {
            inner = inner + a.conj() * *b * Complex::new(self.grid.trapezoid_weight(i), T::zero());
        }
        let cos = (inner.norm() / (na * nb)).min(T::one());
        ((T::one() - cos) * T::of(2.0)).max(T::zero()).sqrt()
    }
}

fn nyquist_check<T: Scalar>(z: &Grid<T>, wavelength: T) -> Result<()> {
    let limit = wavelength / T::of(4.0);
    if z.step() > limit * T::of(1.0 + 1e-9) {
        return Err(Error::NyquistViolation {
            dz: z.step().to64(),
            limit: limit.to64(),
        });
    }
    Ok(())
}

/// Exact discrete diffraction sum `A_j = sum_m w_m chi_m exp(i k z_j xi_m)`
/// with trapezoid weights. Runs as a single zero-padded FFT when the two
/// grids satisfy the conjugacy relation `k dz dxi = 2 pi / M` for integer
/// `M`; otherwise falls back to the direct sum (same values, slower).
fn diffraction_sum<T: Scalar>(
    chi: &[Complex<T>],
    xi: &Grid<T>,
    z: &Grid<T>,
    k: T,
) -> Vec<Complex<T>> {
    let ratio = (T::TAU() / (k * z.step() * xi.step())).to64();
    let m = ratio.round();
    let conjugate = (ratio - m).abs() < 1e-6 * ratio.max(1.0)
        && m >= z.len() as f64
        && m >= xi.len() as f64
        && m <= (1 << 24) as f64;

    if conjugate {
        let m = m as usize;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
        for (i, slot) in buf.iter_mut().enumerate().take(xi.len()) {
            let phase = k * z.min() * xi.at(i);
            *slot = chi[i] * Complex::from_polar(xi.trapezoid_weight(i), phase);
        }
        FftCache::new().inverse(&mut buf);
        let step_phase = k * z.step() * xi.min();
        (0..z.len())
            .map(|j| buf[j] * Complex::from_polar(T::one(), step_phase * T::of(j as f64)))
            .collect()
    } else {
        z.points()
            .map(|zj| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (i, c) in chi.iter().enumerate() {
                    acc = acc + *c * Complex::from_polar(xi.trapezoid_weight(i), k * zj * xi.at(i));
                }
                acc
            })
            .collect()
    }
}

/// Detected-photon collapse kernel of an aperture on the given z grid.
pub fn collapse_kernel<T: Scalar>(
    aperture: &ApertureProfile<T>,
    z_grid: &Grid<T>,
) -> Result<CollapseKernel<T>> {
    nyquist_check(z_grid, aperture.wavelength)?;
    let values = diffraction_sum(&aperture.chi(), &aperture.xi, z_grid, aperture.wavenumber());
    Ok(CollapseKernel::new(*z_grid, values, KernelKind::Detected))
}

/// Undetected-photon kernel: same integral with `chi' = sqrt(f)(1 - t)`.
pub fn complement_kernel<T: Scalar>(
    aperture: &ApertureProfile<T>,
    z_grid: &Grid<T>,
) -> Result<CollapseKernel<T>> {
    nyquist_check(z_grid, aperture.wavelength)?;
    let values = diffraction_sum(
        &aperture.chi_complement(),
        &aperture.xi,
        z_grid,
        aperture.wavenumber(),
    );
    Ok(CollapseKernel::new(*z_grid, values, KernelKind::Undetected))
}

/// Fraction of emitted photons reaching the detector:
/// `eta = mirrors (delta_phi / 2 pi) int |chi|^2 dxi / int f dxi`,
/// normalized so a fully transmitting 4-pi aperture gives exactly 1.
pub fn capture_fraction<T: Scalar>(aperture: &ApertureProfile<T>, mirrors: u32) -> T {
    let geom = T::of(mirrors as f64) * aperture.delta_phi / T::TAU();
    (geom * aperture.chi_norm_sq() / EmissionPattern::total::<T>()).min(T::one())
}

/// Result of inverse aperture design.
#[derive(Debug, Clone)]
pub struct Designed<T> {
    pub aperture: ApertureProfile<T>,
    /// Relative L2 mismatch between the target and the kernel the designed
    /// aperture actually produces (truncation to the capture region).
    pub distortion: T,
    /// Fraction of the target's spectral mass inside the capture region.
    pub retained_mass: T,
}

/// Invert the diffraction integral: recover `t(xi) ~ (1/sqrt(f)) int A(z)
/// exp(-i k z xi) dz` on the conjugate xi grid, zero it outside the capture
/// region, and rescale so `|chi| <= sqrt(f)` pointwise with unit peak
/// transmission. The amplitude scale is set where `f >= 0.01`; closer to the
/// emission poles `t` saturates at 1 instead (the clipped energy is part of
/// the reported distortion).
pub fn design_aperture<T: Scalar>(
    target: &CollapseKernel<T>,
    delta_phi: T,
    capture: (T, T),
    wavelength: T,
) -> Result<Designed<T>> {
    nyquist_check(&target.grid, wavelength)?;
    let k = T::TAU() / wavelength;
    let z = &target.grid;
    let m = next_pow2(4 * z.len());
    let dxi = wavelength / (z.step() * T::of(m as f64));

    // Spectrum on the full conjugate circle, xi_q = q dxi for q in [-M/2, M/2).
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
    for (j, slot) in buf.iter_mut().enumerate().take(z.len()) {
        *slot = target.values[j] * Complex::new(z.trapezoid_weight(j), T::zero());
    }
    FftCache::new().forward(&mut buf);
    let half = (m / 2) as i64;
    let spectrum_at = |q: i64| -> Complex<T> {
        let idx = q.rem_euclid(m as i64) as usize;
        let xi_q = dxi * T::of(q as f64);
        buf[idx] * Complex::from_polar(T::one(), -k * z.min() * xi_q)
    };

    let mut total_mass = T::zero();
    let mut retained = T::zero();
    for q in -half..half {
        let mag = spectrum_at(q).norm_sqr();
        total_mass = total_mass + mag;
        let xi_q = dxi * T::of(q as f64);
        if xi_q >= capture.0 && xi_q <= capture.1 {
            retained = retained + mag;
        }
    }
    let retained_frac = if total_mass > T::zero() {
        retained / total_mass
    } else {
        T::zero()
    };
    if retained_frac < T::of(0.5) {
        return Err(Error::DesignInfeasible {
            retained_percent: (retained_frac * T::of(100.0)).to64(),
        });
    }

    // xi grid covering [-1, 1] on conjugate points.
    let n_side = (T::one() / dxi).to64().floor() as i64;
    let n_xi = (2 * n_side + 1) as usize;
    let xi_grid = Grid::new(-dxi * T::of(n_side as f64), dxi, n_xi)?;

    let f_scale_floor = T::of(0.01);
    let mut t_raw = vec![Complex::new(T::zero(), T::zero()); n_xi];
    let mut peak = T::zero();
    for (i, slot) in t_raw.iter_mut().enumerate() {
        let xi_v = xi_grid.at(i);
        if xi_v < capture.0 || xi_v > capture.1 {
            continue;
        }
        let f = EmissionPattern::value(xi_v);
        if f <= T::zero() {
            continue;
        }
        let g = spectrum_at(i as i64 - n_side);
        let t = g / Complex::new(f.sqrt(), T::zero());
        if f >= f_scale_floor {
            peak = peak.max(t.norm());
        }
        *slot = t;
    }
    if peak <= T::zero() {
        return Err(Error::DesignInfeasible {
            retained_percent: 0.0,
        });
    }
    let scale = T::one() / peak;
    for t in t_raw.iter_mut() {
        *t = *t * scale;
        let n = t.norm();
        if n > T::one() {
            *t = *t / Complex::new(n, T::zero());
        }
    }

    let arc = (capture.0.to64().clamp(-1.0, 1.0).acos() - capture.1.to64().clamp(-1.0, 1.0).acos())
        .abs();
    let aperture = ApertureProfile::new(xi_grid, t_raw, delta_phi, T::of(arc), wavelength, capture)?;

    let rebuilt = collapse_kernel(&aperture, z)?;
    let distortion = rebuilt.shape_distance(target);
    Ok(Designed {
        aperture,
        distortion,
        retained_mass: retained_frac,
    })
}

/// Default kernel grid: +-256 wavelengths at 2^14 points (dz = lambda/32),
/// wide enough to hold the long sinc and Cauchy tails at recorded truncation.
pub fn default_z_grid<T: Scalar>() -> Grid<T> {
    Grid::symmetric(T::of(256.0), 1 << 14).expect("static grid")
}

impl<T: Scalar> ApertureProfile<T> {
    /// Serialize as CSV (`xi, t_re, t_im`) with the geometry in the header.
    pub fn to_table(&self) -> crate::io::CsvTable {
        let mut t = crate::io::CsvTable::new(&["xi", "t_re", "t_im"])
            .with_meta("delta_phi_radians", self.delta_phi.to64())
            .with_meta("mirror_arc_radians", self.mirror_arc.to64())
            .with_meta("wavelength", self.wavelength.to64())
            .with_meta("capture_lo", self.capture.0.to64())
            .with_meta("capture_hi", self.capture.1.to64());
        for (i, xi) in self.xi.points().enumerate() {
            t.push_row(vec![
                xi.to64(),
                self.transmission[i].re.to64(),
                self.transmission[i].im.to64(),
            ]);
        }
        t
    }

    /// Rebuild a validated aperture from its CSV form.
    pub fn from_table(table: &crate::io::CsvTable) -> Result<Self> {
        let meta_f64 = |key: &str| -> Result<f64> {
            table
                .meta(key)
                .ok_or_else(|| Error::Parse(format!("aperture CSV missing header `{key}`")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{key}: {e}")))
        };
        let xi_vals: Vec<T> = table
            .column("xi")
            .ok_or_else(|| Error::Parse("aperture CSV missing `xi` column".into()))?
            .into_iter()
            .map(T::of)
            .collect();
        let re = table
            .column("t_re")
            .ok_or_else(|| Error::Parse("aperture CSV missing `t_re` column".into()))?;
        let im = table
            .column("t_im")
            .ok_or_else(|| Error::Parse("aperture CSV missing `t_im` column".into()))?;
        let grid = Grid::from_points(&xi_vals)?;
        let transmission = re
            .into_iter()
            .zip(im)
            .map(|(r, i)| Complex::new(T::of(r), T::of(i)))
            .collect();
        ApertureProfile::new(
            grid,
            transmission,
            T::of(meta_f64("delta_phi_radians")?),
            T::of(meta_f64("mirror_arc_radians")?),
            T::of(meta_f64("wavelength")?),
            (T::of(meta_f64("capture_lo")?), T::of(meta_f64("capture_hi")?)),
        )
    }
}

impl<T: Scalar> CollapseKernel<T> {
    /// Serialize as CSV (`z, re, im`).
    pub fn to_table(&self) -> crate::io::CsvTable {
        let mut t = crate::io::CsvTable::new(&["z", "re", "im"]);
        for (i, z) in self.grid.points().enumerate() {
            t.push_row(vec![
                z.to64(),
                self.values[i].re.to64(),
                self.values[i].im.to64(),
            ]);
        }
        t
    }

    pub fn from_table(table: &crate::io::CsvTable, kind: KernelKind) -> Result<Self> {
        let z_vals: Vec<T> = table
            .column("z")
            .ok_or_else(|| Error::Parse("kernel CSV missing `z` column".into()))?
            .into_iter()
            .map(T::of)
            .collect();
        let re = table
            .column("re")
            .ok_or_else(|| Error::Parse("kernel CSV missing `re` column".into()))?;
        let im = table
            .column("im")
            .ok_or_else(|| Error::Parse("kernel CSV missing `im` column".into()))?;
        let grid = Grid::from_points(&z_vals)?;
        let values = re
            .into_iter()
            .zip(im)
            .map(|(r, i)| Complex::new(T::of(r), T::of(i)))
            .collect();
        Ok(CollapseKernel::new(grid, values, kind))
    }
}

pub const PRESET_NAMES: [&str; 4] = ["double_gaussian", "cauchy", "square", "full"];

/// Half-width of the `cauchy` preset kernel intensity, in wavelengths.
/// Equals 0.3 in the phase-space units of the Wigner export (X unit = 10
/// wavelengths).
pub const CAUCHY_PRESET_SIGMA: f64 = 3.0;

/// Wavelengths per dimensionless phase-space unit in the Wigner export.
pub const PHASE_SPACE_UNIT: f64 = 10.0;

/// Named aperture presets.
///
/// * `double_gaussian` — two Gaussian image packets (`sigma = 1.5`,
///   separation 15) for superposition preparation; 29-degree mirrors,
///   `delta_phi = 29` degrees, capture `xi in [-1/4, 1/4]`.
/// * `cauchy` — kernel whose intensity `|A|^2` is the Cauchy density of
///   width 0.3, so one detection on a flat state leaves a Cauchy position
///   density.
/// * `square` — top-hat kernel 32 wavelengths wide; 130-degree mirrors.
/// * `full` — fully transmitting aperture over the whole sphere.
pub fn preset<T: Scalar>(name: &str) -> Result<ApertureProfile<T>> {
    let z = default_z_grid::<T>();
    match name {
        "double_gaussian" => {
            let sigma = T::of(1.5);
            let half_sep = T::of(7.5);
            let target = CollapseKernel::from_fn(z, KernelKind::Detected, |zv| {
                let a = (-(zv - half_sep) * (zv - half_sep) / (T::of(4.0) * sigma * sigma)).exp();
                let b = (-(zv + half_sep) * (zv + half_sep) / (T::of(4.0) * sigma * sigma)).exp();
                Complex::new(a + b, T::zero())
            });
            let delta_phi = T::of(29.0f64.to_radians());
            Ok(design_aperture(&target, delta_phi, (T::of(-0.25), T::of(0.25)), T::one())?.aperture)
        }
        "cauchy" => {
            // 0.3 in the dimensionless phase-space units used by the Wigner
            // export (X unit = 10 wavelengths); sub-wavelength widths are not
            // synthesizable from |xi| <= 1.
            let sigma = T::of(CAUCHY_PRESET_SIGMA);
            let target = CollapseKernel::from_fn(z, KernelKind::Detected, |zv| {
                let dens = sigma / (T::PI() * (zv * zv + sigma * sigma));
                Complex::new(dens.sqrt(), T::zero())
            });
            Ok(design_aperture(&target, T::TAU(), (-T::one(), T::one()), T::one())?.aperture)
        }
        "square" => {
            let half_w = T::of(16.0);
            let half_step = z.step() * T::of(0.5);
            let target = CollapseKernel::from_fn(z, KernelKind::Detected, |zv| {
                // half-weight samples on the jump itself
                let d = zv.abs() - half_w;
                let v = if d < -half_step {
                    T::one()
                } else if d.abs() <= half_step {
                    T::of(0.5)
                } else {
                    T::zero()
                };
                Complex::new(v, T::zero())
            });
            let cap = T::of(25.0f64.to_radians().cos());
            let delta_phi = T::of(130.0f64.to_radians());
            Ok(design_aperture(&target, delta_phi, (-cap, cap), T::one())?.aperture)
        }
        "full" => {
            let m = next_pow2(4 * z.len());
            let dxi = T::one() / (z.step() * T::of(m as f64));
            let n_side = (T::one() / dxi).to64().floor() as i64;
            let n_xi = (2 * n_side + 1) as usize;
            let xi_grid = Grid::new(-dxi * T::of(n_side as f64), dxi, n_xi)?;
            let t = vec![Complex::new(T::one(), T::zero()); n_xi];
            ApertureProfile::new(xi_grid, t, T::TAU(), T::PI(), T::one(), (-T::one(), T::one()))
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}
