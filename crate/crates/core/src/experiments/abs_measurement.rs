//! Measurement of |z| through a fully transmitting aperture.
//!
//! Collimating, splitting, inverting one arm about z = 0, and recombining
//! superposes the image with its mirror copy, so a detection at image
//! position `a >= 0` applies the symmetrized kernel
//! `M_a(z) ~ A(z - a) + A(z + a)` and reveals only |z|. Repeating the
//! excitation makes the |z| measurement quasi-continuous; away from the
//! origin the kernel is linear, so the conditioned packets stay very nearly
//! Gaussian.

use num_complex::Complex;
use rand::Rng;

use crate::density::GridDensity;
use crate::error::Result;
use crate::grid::Grid;
use crate::optics::{collapse_kernel, preset, CollapseKernel, KernelKind};
use crate::scalar::Scalar;
use crate::state::{detection_distribution, MeasurementOutcome, WaveFunction};

pub struct AbsPositionMeasurement<T: Scalar> {
    grid: Grid<T>,
    kernel: CollapseKernel<T>,
    center: usize,
}

impl<T: Scalar> AbsPositionMeasurement<T> {
    /// Build the bare-dipole kernel of a fully transmitting aperture on the
    /// given grid.
    pub fn new(grid: Grid<T>) -> Result<Self> {
        let full = preset::<T>("full")?;
        let kernel = collapse_kernel(&full, &grid)?;
        let center = grid.center_index();
        Ok(Self {
            grid,
            kernel,
            center,
        })
    }

    fn kernel_at(&self, idx: i64) -> Complex<T> {
        if idx >= 0 && (idx as usize) < self.grid.len() {
            self.kernel.values[idx as usize]
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }

    /// Detection density over `a >= 0`:
    /// `P(a) ~ int |A(z-a) + A(z+a)|^2 |psi|^2 dz`. The two direct terms are
    /// kernel-intensity correlations; the interference term couples the
    /// mirror images and is summed explicitly.
    pub fn detection_density(&self, psi: &WaveFunction<T>) -> Result<GridDensity<T>> {
        let direct = detection_distribution(psi, &self.kernel)?;
        let rho = psi.density();
        let n = self.grid.len();
        let half = Grid::new(T::zero(), self.grid.step(), n - self.center)?;
        let mut values = Vec::with_capacity(half.len());
        for (offset, _) in (self.center..n).enumerate() {
            let j_pos = self.center + offset;
            let j_neg = self.center - offset;
            let t1 = direct.values[j_pos];
            let t2 = direct.values[j_neg];
            // cross term: 2 Re sum_m A(z_m - a) conj(A(z_m + a)) rho_m dz
            let mut cross = T::zero();
            for (m, &r) in rho.values.iter().enumerate() {
                if r == T::zero() {
                    continue;
                }
                let am = self.kernel_at(self.center as i64 + m as i64 - j_pos as i64);
                let ap = self.kernel_at(self.center as i64 + m as i64 - j_neg as i64);
                cross = cross + (am * ap.conj()).re * r;
            }
            cross = cross * T::of(2.0) * self.grid.step();
            values.push((t1 + t2 + cross).max(T::zero()));
        }
        let mut density = GridDensity::new(half, values);
        density.normalize();
        Ok(density)
    }

    /// The symmetrized kernel for a detection at `a`.
    pub fn symmetrized_kernel(&self, a: T) -> CollapseKernel<T> {
        let shift = self.grid.steps_from_zero(a);
        let values: Vec<Complex<T>> = (0..self.grid.len() as i64)
            .map(|j| self.kernel_at(j - shift) + self.kernel_at(j + shift))
            .collect();
        CollapseKernel::new(self.grid, values, KernelKind::Detected)
    }

    /// One |z| measurement: sample `a >= 0` and collapse with `M_a`.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        psi: &WaveFunction<T>,
        rng: &mut R,
    ) -> Result<MeasurementOutcome<T>> {
        let density = self.detection_density(psi)?;
        let a = density.grid.at(density.grid.nearest(density.sample(rng)));
        let kernel = self.symmetrized_kernel(a);
        let posterior = psi.apply_collapse(&kernel, T::zero())?;
        Ok(MeasurementOutcome {
            detected: true,
            location: a,
            posterior,
        })
    }
}
