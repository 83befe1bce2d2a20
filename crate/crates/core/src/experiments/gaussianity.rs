//! Repeated stable-density measurements collapse any position density to a
//! Gaussian; the cumulant accumulation makes the mechanism quantitative.

use num_complex::Complex;
use rand::Rng;

use crate::density::GridDensity;
use crate::error::Result;
use crate::grid::Grid;
use crate::levy::{
    sample_stable, weighted_char_transform, StableFactorTable, StableParams,
};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::stats;

/// Gaussianity metrics after each of `1..=N` measurements.
#[derive(Debug, Clone)]
pub struct GaussianityTrace<T> {
    pub alpha: T,
    pub excess_kurtosis: Vec<T>,
    pub ks_to_gaussian: Vec<T>,
    pub measurement_results: Vec<T>,
    pub density: GridDensity<T>,
}

/// Multiply an initial density by `n` unit-width stable densities whose
/// centers are drawn from the running predictive distribution (posterior
/// convolved with the measurement error), tracking excess kurtosis and the
/// KS distance to the best-fit Gaussian after every step.
pub fn collapse_to_gaussian<T: Scalar, R: Rng + ?Sized>(
    alpha: T,
    n_measurements: usize,
    grid: &Grid<T>,
    rng: &mut R,
) -> Result<GaussianityTrace<T>> {
    let params = StableParams::standard(alpha)?;
    let span = grid.max().max(-grid.min());
    let table = StableFactorTable::new(&params, T::of(2.0) * span + T::of(50.0), grid.step())?;

    let mut density = GridDensity::uniform(*grid);
    let mut kurtosis = Vec::with_capacity(n_measurements);
    let mut ks = Vec::with_capacity(n_measurements);
    let mut results = Vec::with_capacity(n_measurements);
    for _ in 0..n_measurements {
        // predictive draw: posterior sample plus measurement error
        let y = density.sample(rng) + sample_stable(&params, rng);
        let y = grid.step() * T::of((y / grid.step()).round().to64());
        for (i, v) in density.values.iter_mut().enumerate() {
            *v = *v * table.value(grid.at(i) - y);
        }
        density.normalize();
        results.push(y);
        kurtosis.push(density.excess_kurtosis());
        ks.push(density.ks_to_best_gaussian());
    }
    Ok(GaussianityTrace {
        alpha,
        excess_kurtosis: kurtosis,
        ks_to_gaussian: ks,
        measurement_results: results,
        density,
    })
}

/// Cumulants of the accumulated log product of rescaled characteristic-
/// function factors, per ladder point N (replicate-averaged magnitudes).
#[derive(Debug, Clone)]
pub struct CumulantTrace<T> {
    pub alpha: T,
    pub n_ladder: Vec<usize>,
    pub kappa1_abs: Vec<T>,
    pub kappa2_abs: Vec<T>,
    pub kappa3_abs: Vec<T>,
    pub kappa4_abs: Vec<T>,
    /// log-log slopes of |kappa_j| against N.
    pub slope1: T,
    pub slope2: T,
    pub slope3: T,
    pub slope4: T,
}

/// Complex raw moments `m_j = D_j(mu) / D_0(mu)` of one characteristic-
/// function factor, from precomputed transform tables with an asymptotic
/// fallback for far-out centers.
struct FactorMoments<T> {
    grid: Grid<T>,
    tables: [Vec<Complex<T>>; 5],
    alpha: T,
}

impl<T: Scalar> FactorMoments<T> {
    fn new(alpha: T) -> Result<Self> {
        let grid = Grid::symmetric(T::of(2000.0), 1 << 18)?;
        let tables = [
            weighted_char_transform(alpha, 0, &grid)?,
            weighted_char_transform(alpha, 1, &grid)?,
            weighted_char_transform(alpha, 2, &grid)?,
            weighted_char_transform(alpha, 3, &grid)?,
            weighted_char_transform(alpha, 4, &grid)?,
        ];
        Ok(Self {
            grid,
            tables,
            alpha,
        })
    }

    fn moments(&self, mu: T) -> [Complex<T>; 4] {
        if mu.abs() < self.grid.max() {
            let i = self.grid.nearest(mu);
            let d0 = self.tables[0][i];
            [
                self.tables[1][i] / d0,
                self.tables[2][i] / d0,
                self.tables[3][i] / d0,
                self.tables[4][i] / d0,
            ]
        } else {
            // p^(k)/p -> (-1)^k prod_{i=1..k} (alpha + i) / mu^k deep in the tail
            let a = self.alpha;
            let f1 = a + T::one();
            let f2 = f1 * (a + T::of(2.0));
            let f3 = f2 * (a + T::of(3.0));
            let f4 = f3 * (a + T::of(4.0));
            let inv = T::one() / mu;
            [
                Complex::new(T::zero(), f1 * inv),
                Complex::new(-f2 * inv * inv, T::zero()),
                Complex::new(T::zero(), -f3 * inv * inv * inv),
                Complex::new(f4 * inv * inv * inv * inv, T::zero()),
            ]
        }
    }
}

fn cumulants_from_moments<T: Scalar>(m: &[Complex<T>; 4]) -> [Complex<T>; 4] {
    let c = |x: f64| Complex::new(T::of(x), T::zero());
    let m1 = m[0];
    let m2 = m[1];
    let m3 = m[2];
    let m4 = m[3];
    let k1 = m1;
    let k2 = m2 - m1 * m1;
    let k3 = m3 - c(3.0) * m1 * m2 + c(2.0) * m1 * m1 * m1;
    let k4 = m4 - c(4.0) * m1 * m3 - c(3.0) * m2 * m2 + c(12.0) * m1 * m1 * m2
        - c(6.0) * m1 * m1 * m1 * m1;
    [k1, k2, k3, k4]
}

/// Accumulate the cumulants of the N-fold convolution of rescaled one-step
/// factors `chi(s sqrt(N)) = exp(-N^{alpha/2}|s|^alpha + i mu_n sqrt(N) s)`
/// with centers `mu_n` drawn from the stable density itself. Per-factor
/// cumulants scale as `N^{-j/2}` and add under convolution, which is exactly
/// the Taylor data of the accumulated log product.
pub fn cumulant_accumulation<T: Scalar>(
    alpha: T,
    n_ladder: &[usize],
    replicates: usize,
    master_seed: u64,
) -> Result<CumulantTrace<T>> {
    let factor = FactorMoments::new(alpha)?;
    let params = StableParams::standard(alpha)?;
    let mut k_abs = [vec![], vec![], vec![], vec![]];
    for &n in n_ladder {
        let mut acc = [T::zero(); 4];
        for rep in 0..replicates {
            let mut rng = stream_rng(master_seed, (n as u64) << 20 | rep as u64);
            let mut totals = [Complex::new(T::zero(), T::zero()); 4];
            for _ in 0..n {
                let mu = sample_stable(&params, &mut rng);
                let k = cumulants_from_moments(&factor.moments(mu));
                for (t, kj) in totals.iter_mut().zip(k.iter()) {
                    *t = *t + *kj;
                }
            }
            let root_n = T::of(n as f64).sqrt();
            let mut scale = T::one();
            for (j, t) in totals.iter().enumerate() {
                scale = scale / root_n;
                acc[j] = acc[j] + (*t * Complex::new(scale, T::zero())).norm();
            }
        }
        for (j, a) in acc.iter().enumerate() {
            k_abs[j].push(*a / T::of(replicates as f64));
        }
    }
    let ns: Vec<T> = n_ladder.iter().map(|&n| T::of(n as f64)).collect();
    let slope = |ys: &Vec<T>| stats::loglog_slope(&ns, ys);
    Ok(CumulantTrace {
        alpha,
        n_ladder: n_ladder.to_vec(),
        slope1: slope(&k_abs[0])?,
        slope2: slope(&k_abs[1])?,
        slope3: slope(&k_abs[2])?,
        slope4: slope(&k_abs[3])?,
        kappa1_abs: std::mem::take(&mut k_abs[0]),
        kappa2_abs: std::mem::take(&mut k_abs[1]),
        kappa3_abs: std::mem::take(&mut k_abs[2]),
        kappa4_abs: std::mem::take(&mut k_abs[3]),
    })
}
