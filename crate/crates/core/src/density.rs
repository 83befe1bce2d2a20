//! Probability densities sampled on a uniform grid.

use rand::Rng;

use crate::grid::Grid;
use crate::scalar::Scalar;
use crate::stats;

/// A (usually normalized) real density on a uniform grid.
#[derive(Debug, Clone)]
pub struct GridDensity<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> GridDensity<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Self {
        assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn uniform(grid: Grid<T>) -> Self {
        let v = T::one() / (grid.step() * T::of(grid.len() as f64));
        let values = vec![v; grid.len()];
        Self { grid, values }
    }

    /// Trapezoid mass over the grid.
    pub fn total_mass(&self) -> T {
        self.grid.integrate(&self.values)
    }

    /// Rescale to unit trapezoid mass. Returns the mass prior to rescaling.
    pub fn normalize(&mut self) -> T {
        let mass = self.total_mass();
        if mass > T::zero() {
            let inv = T::one() / mass;
            for v in self.values.iter_mut() {
                *v = *v * inv;
            }
        }
        mass
    }

    pub fn mean(&self) -> T {
        let mut acc = T::zero();
        let mut mass = T::zero();
        for (i, &v) in self.values.iter().enumerate() {
            let w = self.grid.trapezoid_weight(i) * v;
            acc = acc + w * self.grid.at(i);
            mass = mass + w;
        }
        acc / mass
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        let mut acc = T::zero();
        let mut mass = T::zero();
        for (i, &v) in self.values.iter().enumerate() {
            let w = self.grid.trapezoid_weight(i) * v;
            let d = self.grid.at(i) - m;
            acc = acc + w * d * d;
            mass = mass + w;
        }
        acc / mass
    }

    pub fn excess_kurtosis(&self) -> T {
        let m = self.mean();
        let mut m2 = T::zero();
        let mut m4 = T::zero();
        let mut mass = T::zero();
        for (i, &v) in self.values.iter().enumerate() {
            let w = self.grid.trapezoid_weight(i) * v;
            let d = self.grid.at(i) - m;
            let d2 = d * d;
            m2 = m2 + w * d2;
            m4 = m4 + w * d2 * d2;
            mass = mass + w;
        }
        m2 = m2 / mass;
        m4 = m4 / mass;
        m4 / (m2 * m2) - T::of(3.0)
    }

    /// Cumulative trapezoid mass at every grid point (not normalized).
    pub fn cumulative(&self) -> Vec<T> {
        let half = T::of(0.5);
        let dx = self.grid.step();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = T::zero();
        out.push(acc);
        for w in self.values.windows(2) {
            acc = acc + (w[0] + w[1]) * half * dx;
            out.push(acc);
        }
        out
    }

    /// Value of x at which the cumulative mass fraction reaches `q`.
    pub fn quantile(&self, q: f64) -> T {
        let cum = self.cumulative();
        let total = *cum.last().unwrap();
        let target = total * T::of(q);
        match cum.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
            Ok(i) => self.grid.at(i),
            Err(i) => {
                if i == 0 {
                    self.grid.min()
                } else if i >= cum.len() {
                    self.grid.max()
                } else {
                    let lo = cum[i - 1];
                    let hi = cum[i];
                    let frac = if hi > lo { (target - lo) / (hi - lo) } else { T::zero() };
                    self.grid.at(i - 1) + self.grid.step() * frac
                }
            }
        }
    }

    pub fn iqr(&self) -> T {
        self.quantile(0.75) - self.quantile(0.25)
    }

    pub fn median(&self) -> T {
        self.quantile(0.5)
    }

    /// Draw one sample by inverse-CDF interpolation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.quantile(T::unit(rng).to64())
    }

    /// Kolmogorov-Smirnov distance against a reference CDF, evaluated on the
    /// grid from the density's own cumulative mass (renormalized).
    pub fn ks_to_cdf<F: Fn(T) -> T>(&self, cdf: F) -> T {
        let cum = self.cumulative();
        let total = *cum.last().unwrap();
        let mut worst = T::zero();
        for (i, &c) in cum.iter().enumerate() {
            let d = (c / total - cdf(self.grid.at(i))).abs();
            worst = worst.max(d);
        }
        worst
    }

    /// KS distance to the Gaussian fitted robustly (median and IQR), so the
    /// fit stays meaningful for heavy-tailed densities.
    pub fn ks_to_best_gaussian(&self) -> T {
        let mu = self.median();
        let sd = self.iqr() / T::of(1.3489795003921634);
        self.ks_to_cdf(|x| stats::normal_cdf(x, mu, sd))
    }
}
