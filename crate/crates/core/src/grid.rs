//! Uniform one-dimensional grids.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A uniform grid `x_i = min + i * step`, `i = 0..len`.
///
/// Uniformity is guaranteed by construction; operations that require it
/// (spectral transforms, on-grid kernel shifts) rely on this invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    min: T,
    step: T,
    len: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(min: T, step: T, len: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() || !min.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "step must be positive and finite, got {}",
                step.to64()
            )));
        }
        if len < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {len}")));
        }
        Ok(Self { min, step, len })
    }

    /// Symmetric grid in FFT layout: `x_j = (j - len/2) * step`, so the point
    /// `x = 0` is on the grid (at index `len/2`) and the span is `[-half_width,
    /// half_width)`.
    pub fn symmetric(half_width: T, len: usize) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::InvalidGrid("half_width must be positive".into()));
        }
        let step = (half_width + half_width) / T::of(len as f64);
        Self::new(-half_width, step, len)
    }

    /// Reconstruct a grid from explicit points, rejecting non-uniform input.
    pub fn from_points(points: &[T]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 points".into()));
        }
        let step = points[1] - points[0];
        let g = Self::new(points[0], step, points.len())?;
        let tol = step * T::of(1e-6);
        for (i, &p) in points.iter().enumerate() {
            if (p - g.at(i)).abs() > tol {
                return Err(Error::InvalidGrid(format!(
                    "non-uniform spacing near index {i}"
                )));
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn step(&self) -> T {
        self.step
    }

    #[inline]
    pub fn min(&self) -> T {
        self.min
    }

    #[inline]
    pub fn max(&self) -> T {
        self.at(self.len - 1)
    }

    #[inline]
    pub fn at(&self, i: usize) -> T {
        self.min + self.step * T::of(i as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len).map(move |i| self.at(i))
    }

    /// Index of the grid point nearest to `x` (clamped to the grid).
    pub fn nearest(&self, x: T) -> usize {
        let raw = ((x - self.min) / self.step).round().to64();
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.len - 1)
        }
    }

    /// Index holding `x = 0` exactly for symmetric grids; nearest otherwise.
    #[inline]
    pub fn center_index(&self) -> usize {
        self.nearest(T::zero())
    }

    /// Signed number of grid steps from the origin to `x`, rounded.
    pub fn steps_from_zero(&self, x: T) -> i64 {
        (x / self.step).round().to64() as i64
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.len == other.len
            && (self.step - other.step).abs() <= self.step * T::of(1e-9)
            && (self.min - other.min).abs() <= self.step * T::of(1e-6)
    }

    /// Trapezoid quadrature weight for index `i` (step factor included).
    #[inline]
    pub fn trapezoid_weight(&self, i: usize) -> T {
        if i == 0 || i == self.len - 1 {
            self.step * T::of(0.5)
        } else {
            self.step
        }
    }

    /// Trapezoid integral of sampled values over the grid.
    pub fn integrate(&self, values: &[T]) -> T {
        assert_eq!(values.len(), self.len);
        let mut acc = T::zero();
        for (i, &v) in values.iter().enumerate() {
            acc = acc + v * self.trapezoid_weight(i);
        }
        acc
    }
}
