//! Scaling of the average uncertainty reduction under repeated stable-noise
//! measurements of a Gaussian state.
//!
//! Over a fixed horizon split into `N` steps of `dt = 1/N`, each step
//! multiplies the observer's density by a stable density of width
//! `gamma dt^(1/alpha - 1)` (the law of `dL_alpha/dt`) centered on a result
//! drawn from the predictive distribution. The total variance reduction
//! scales as `N^(2/alpha - 1)`: flat only for the Gaussian, so no other
//! stable law survives the continuum limit.

use rand::Rng;

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::levy::{sample_stable, StableFactorTable, StableParams};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::stats;

#[derive(Debug, Clone)]
pub struct ScalingConfig<T> {
    pub alpha: T,
    /// Ladder length; rung `r` uses `2^r` subdivisions of the unit horizon.
    pub rungs: usize,
    pub realizations: usize,
    /// Overall error scale `gamma`; large values keep every measurement weak
    /// so the reductions stay in the linear regime.
    pub error_scale: T,
    pub master_seed: u64,
    pub bootstrap_resamples: usize,
}

impl<T: Scalar> Default for ScalingConfig<T> {
    fn default() -> Self {
        Self {
            alpha: T::of(1.5),
            rungs: 4,
            realizations: 4000,
            error_scale: T::of(24.0),
            master_seed: 0,
            bootstrap_resamples: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalingResult<T> {
    pub alpha: T,
    /// Number of subdivisions per rung (1, 2, 4, ...).
    pub subdivisions: Vec<usize>,
    /// Mean total variance reduction magnitude per rung.
    pub mean_reduction: Vec<T>,
    /// Per-rung reduction samples (used by the bootstrap).
    pub samples: Vec<Vec<T>>,
    pub slope: T,
    pub slope_ci: (T, T),
    pub slope_se: T,
}

impl<T: Scalar> ScalingResult<T> {
    /// The analytic exponent the slope is compared against.
    pub fn analytic_exponent(&self) -> T {
        T::of(2.0) / self.alpha - T::one()
    }
}

fn state_grid<T: Scalar>() -> Grid<T> {
    Grid::symmetric(T::of(24.0), 1 << 10).expect("static grid")
}

fn slope_of_means<T: Scalar>(subdivisions: &[usize], means: &[T]) -> Result<T> {
    let xs: Vec<T> = subdivisions.iter().map(|&n| T::of(n as f64)).collect();
    for &m in means {
        if !(m > T::zero()) {
            return Err(Error::FitFailure(
                "non-positive mean uncertainty reduction".into(),
            ));
        }
    }
    stats::loglog_slope(&xs, means)
}

/// Monte Carlo estimate of the reduction-scaling exponent.
pub fn levy_collapse_scaling<T: Scalar>(cfg: &ScalingConfig<T>) -> Result<ScalingResult<T>> {
    let params = StableParams::standard(cfg.alpha)?;
    let grid = state_grid::<T>();
    let span = grid.max();
    let initial = {
        let mut d = GridDensity::new(
            grid,
            grid.points()
                .map(|x| (-x * x / T::of(2.0)).exp())
                .collect(),
        );
        d.normalize();
        d
    };
    let v0 = initial.variance();

    let mut subdivisions = Vec::with_capacity(cfg.rungs);
    let mut samples: Vec<Vec<T>> = Vec::with_capacity(cfg.rungs);
    for rung in 0..cfg.rungs {
        let steps = 1usize << rung;
        let dt = T::one() / T::of(steps as f64);
        let width = cfg.error_scale * dt.powf(T::one() / cfg.alpha - T::one());
        let step_params = params.with_sigma(width);
        let table = StableFactorTable::new(
            &step_params,
            T::of(2.0) * span + T::of(64.0) * width,
            grid.step(),
        )?;
        let mut rung_samples = Vec::with_capacity(cfg.realizations);
        for real in 0..cfg.realizations {
            let mut rng = stream_rng(cfg.master_seed, ((rung as u64) << 32) | real as u64);
            let mut density = initial.clone();
            for _ in 0..steps {
                let y = density.sample(&mut rng) + sample_stable(&step_params, &mut rng);
                let y = grid.step() * T::of((y / grid.step()).round().to64());
                for (i, v) in density.values.iter_mut().enumerate() {
                    *v = *v * table.value(grid.at(i) - y);
                }
                density.normalize();
            }
            rung_samples.push(v0 - density.variance());
        }
        subdivisions.push(steps);
        samples.push(rung_samples);
    }

    let means: Vec<T> = samples.iter().map(|s| stats::mean(s)).collect();
    let slope = slope_of_means(&subdivisions, &means)?;

    // bootstrap the slope by resampling realizations within each rung
    let mut boot_rng = stream_rng(cfg.master_seed, u64::MAX);
    let mut boot = Vec::with_capacity(cfg.bootstrap_resamples);
    for _ in 0..cfg.bootstrap_resamples {
        let mut ok = true;
        let mut bmeans = Vec::with_capacity(cfg.rungs);
        for rung_samples in &samples {
            let n = rung_samples.len();
            let mut acc = T::zero();
            for _ in 0..n {
                acc = acc + rung_samples[boot_rng.random_range(0..n)];
            }
            let m = acc / T::of(n as f64);
            if !(m > T::zero()) {
                ok = false;
                break;
            }
            bmeans.push(m);
        }
        if !ok {
            continue;
        }
        if let Ok(s) = slope_of_means(&subdivisions, &bmeans) {
            boot.push(s);
        }
    }
    if boot.len() < cfg.bootstrap_resamples / 2 {
        return Err(Error::FitFailure("bootstrap slope fits failed".into()));
    }
    let se = stats::variance(&boot).sqrt();
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ci = (
        stats::quantile_sorted(&boot, 0.025),
        stats::quantile_sorted(&boot, 0.975),
    );

    Ok(ScalingResult {
        alpha: cfg.alpha,
        subdivisions,
        mean_reduction: means,
        samples,
        slope,
        slope_ci: ci,
        slope_se: se,
    })
}

#[derive(Debug, Clone)]
pub struct DeterministicScaling<T> {
    pub alpha: T,
    pub dts: Vec<T>,
    /// `|E[Delta V]|` for a single measurement of each duration.
    pub mean_reduction: Vec<T>,
    /// Slope of `log |E dV|` against `log dt`.
    pub single_step_slope: T,
    /// Scaling exponent of the N-step total, `1 - single_step_slope`
    /// (compare against `2/alpha - 1`).
    pub exponent: T,
}

/// Deterministic variant: a narrow Gaussian state, with the reduction
/// averaged over all measurement results by quadrature instead of sampling.
pub fn deterministic_scaling<T: Scalar>(
    alpha: T,
    dt_ladder: &[T],
    error_scale: T,
) -> Result<DeterministicScaling<T>> {
    let params = StableParams::standard(alpha)?;
    let sigma0 = T::of(0.25);
    let grid = Grid::symmetric(T::of(8.0), 1 << 9)?;
    let initial = {
        let mut d = GridDensity::new(
            grid,
            grid.points()
                .map(|x| (-x * x / (T::of(2.0) * sigma0 * sigma0)).exp())
                .collect(),
        );
        d.normalize();
        d
    };
    let v0 = initial.variance();

    let mut reductions = Vec::with_capacity(dt_ladder.len());
    for &dt in dt_ladder {
        let width = error_scale * dt.powf(T::one() / alpha - T::one());
        let step_params = params.with_sigma(width);
        let table = StableFactorTable::new(
            &step_params,
            grid.max() + T::of(80.0) * width,
            grid.step(),
        )?;
        // E[dV] = int P_pred(y) (V_post(y) - V0) dy with
        // P_pred(y) = int p_w(y - x) rho0(x) dx
        let y_step = width / T::of(25.0);
        let y_count = 4000usize;
        let mut acc = T::zero();
        let mut mass = T::zero();
        let mut post = initial.clone();
        for iy in 0..y_count {
            let y = (T::of(iy as f64) - T::of(y_count as f64 / 2.0)) * y_step;
            let mut pred = T::zero();
            for (i, &rho) in initial.values.iter().enumerate() {
                pred = pred + table.value(y - grid.at(i)) * rho;
            }
            pred = pred * grid.step();
            if !(pred > T::zero()) {
                continue;
            }
            post.values.clone_from(&initial.values);
            for (i, v) in post.values.iter_mut().enumerate() {
                *v = *v * table.value(grid.at(i) - y);
            }
            if !(post.normalize() > T::zero()) {
                // posterior underflowed: a result this extreme carries no
                // predictive weight either
                continue;
            }
            acc = acc + pred * (v0 - post.variance());
            mass = mass + pred;
        }
        reductions.push(acc / mass);
    }
    for &r in &reductions {
        if !(r > T::zero()) {
            return Err(Error::FitFailure(
                "non-positive deterministic reduction".into(),
            ));
        }
    }
    let slope = stats::loglog_slope(dt_ladder, &reductions)?;
    Ok(DeterministicScaling {
        alpha,
        dts: dt_ladder.to_vec(),
        mean_reduction: reductions,
        single_step_slope: slope,
        exponent: T::one() - slope,
    })
}
