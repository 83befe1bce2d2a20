//! Anomalous diffusion of the conditioned mean position under repeated
//! square-profile measurements.
//!
//! Each detection collapses the state to a sharp-edged profile whose
//! back-action deposits sinc-squared momentum tails; a quarter period of the
//! trap rotates those tails into position, so the next detection shifts the
//! mean by a heavy-tailed jump. The width of the pairwise-sum distribution
//! of the jumps exceeds sqrt(2) times the single-jump width: `sigma_2 =
//! 2^beta sigma_1` with `beta > 0.5`.

use rand::Rng;

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::optics::{design_aperture, preset, ApertureProfile, CollapseKernel, KernelKind};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::state::{HarmonicTrap, PhotonImaging, QuarterPeriodPlan, WaveFunction};
use crate::stats;

/// Pure-state unraveling of an undetected emission.
///
/// Averaging the undetected-photon image position leaves the position
/// density untouched and multiplies coherences by the kernel
/// autocorrelation — a momentum kick by the photon's transverse recoil.
/// Conditioning on the photon's far-field direction reproduces that channel
/// with pure states: `psi -> exp(i k xi z) psi`, `xi` drawn from the
/// undetected angular density `|chi'(xi)|^2`. Sampling an image position
/// instead would pin the atom to the sub-wavelength dipole image on every
/// loss, which is a different (valid) unraveling but destroys the
/// conditioned-jump statistics the diffusion study measures.
pub struct RecoilSampler<T> {
    xi_density: GridDensity<T>,
    wavenumber: T,
}

impl<T: Scalar> RecoilSampler<T> {
    pub fn new(aperture: &ApertureProfile<T>) -> Self {
        let chi_c = aperture.chi_complement();
        let values = chi_c.iter().map(|c| c.norm_sqr()).collect();
        let mut xi_density = GridDensity::new(aperture.xi, values);
        xi_density.normalize();
        Self {
            xi_density,
            wavenumber: aperture.wavenumber(),
        }
    }

    /// Draw one recoil wavenumber `k xi`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.wavenumber * self.xi_density.sample(rng)
    }
}

/// Which record entries feed the width statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostSelectPolicy {
    /// Every detected measurement.
    None,
    /// Only measurements whose photon was detected on the first emission.
    FirstEmission,
}

/// Collapse profile driving the diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionKernel {
    /// The square (sinc-aperture) preset: heavy-tailed back-action.
    Square,
    /// A broad Gaussian kernel: normal-diffusion control.
    GaussianControl,
}

#[derive(Debug, Clone)]
pub struct DiffusionConfig<T> {
    pub grid: Grid<T>,
    pub trap: HarmonicTrap<T>,
    pub kernel: DiffusionKernel,
    pub detections_per_trajectory: usize,
    /// Detection probability per emission (the post-selected efficiency;
    /// the mean loss rate is `(1 - efficiency)/efficiency`).
    pub efficiency: T,
    pub post_select: PostSelectPolicy,
    pub trajectories: usize,
    /// Position-density std of the initial broad Gaussian.
    pub initial_width: T,
    /// Detection cycles evolved before recording starts, letting the
    /// conditioned packet reach its stationary shape.
    pub burn_in: usize,
    pub master_seed: u64,
}

impl<T: Scalar> DiffusionConfig<T> {
    /// Desk-scale defaults. The trap length is 4 wavelengths: undetected
    /// emissions collapse the atom to the sub-wavelength dipole image, so
    /// the posterior momentum support reaches the full photon band +-2pi,
    /// and the quarter period maps that band to +-2pi x0^2 — which must fit
    /// the grid (x0 <= sqrt(L / 2pi), about 6.4 wavelengths at L = 256).
    pub fn desk_default(kernel: DiffusionKernel, efficiency: T, master_seed: u64) -> Self {
        Self {
            grid: crate::optics::default_z_grid(),
            trap: HarmonicTrap {
                length_scale: T::of(16.0),
            },
            kernel,
            detections_per_trajectory: 200,
            efficiency,
            post_select: PostSelectPolicy::None,
            trajectories: 24,
            initial_width: T::of(30.0),
            burn_in: 16,
            master_seed,
        }
    }

    /// Build the aperture for the configured kernel on the default grid.
    pub fn aperture(&self) -> Result<ApertureProfile<T>> {
        match self.kernel {
            DiffusionKernel::Square => preset("square"),
            DiffusionKernel::GaussianControl => {
                // the coherent-state width is the quarter-period fixed
                // point, so the conditioned packet neither breathes nor
                // alternates scales between cycles
                let sigma = self.trap.length_scale / T::SQRT_2();
                let target =
                    CollapseKernel::from_fn(self.grid, KernelKind::Detected, |zv| {
                        num_complex::Complex::new(
                            (-zv * zv / (T::of(4.0) * sigma * sigma)).exp(),
                            T::zero(),
                        )
                    });
                let cap = T::of(25.0f64.to_radians().cos());
                let designed = design_aperture(
                    &target,
                    T::of(130.0f64.to_radians()),
                    (-cap, cap),
                    T::one(),
                )?;
                Ok(designed.aperture)
            }
        }
    }
}

/// Per-trajectory record of the conditioned mean and its jumps.
#[derive(Debug, Clone)]
pub struct DiffusionRecord<T> {
    pub stream: u64,
    /// Change of <X> across each detected collapse.
    pub delta_mean_x: Vec<T>,
    /// Undetected emissions preceding each detection.
    pub losses: Vec<u32>,
    pub post_selected: Vec<bool>,
    /// Conditioned mean after each detected collapse.
    pub mean_x: Vec<T>,
    pub aborted: bool,
    /// Largest quarter-period mass loss seen along the trajectory.
    pub max_lost_mass: T,
}

impl<T: Scalar> DiffusionRecord<T> {
    pub fn is_consistent(&self) -> bool {
        self.delta_mean_x.len() == self.losses.len()
            && self.losses.len() == self.post_selected.len()
            && self.mean_x.len() == self.delta_mean_x.len()
    }
}

/// Simulate one trajectory: per cycle, emit photons (undetected collapses
/// applied) until one is detected, record the mean shift of the detected
/// collapse, then evolve a quarter period. Null posteriors abort the
/// trajectory; the partial record is returned flagged.
///
/// The state is kept in a co-moving phase-space frame: after each detection
/// the grid is re-centered on the packet (an exact on-grid translation plus
/// a momentum-boost phase), and the frame offsets rotate classically with
/// the trap. Harmonic evolution is affine, so this is the same physics with
/// the grid truncation confined to the packet-relative tails; in the lab
/// frame the conditioned mean diffuses without bound.
pub fn diffusion_trajectory<T: Scalar>(
    cfg: &DiffusionConfig<T>,
    aperture: &ApertureProfile<T>,
    stream: u64,
) -> Result<DiffusionRecord<T>> {
    let mut rng = stream_rng(cfg.master_seed, stream);
    let mut imaging = PhotonImaging::new(aperture, &cfg.grid, 1)?;
    let recoil = RecoilSampler::new(aperture);
    let mut quarter = QuarterPeriodPlan::new(cfg.grid, &cfg.trap)?;
    let mut psi = WaveFunction::gaussian(cfg.grid, T::zero(), cfg.initial_width)?;
    let x0_sq = cfg.trap.length_scale * cfg.trap.length_scale;
    // lab-frame position and momentum of the grid origin
    let mut frame_x = T::zero();
    let mut frame_p = T::zero();

    let mut record = DiffusionRecord {
        stream,
        delta_mean_x: Vec::with_capacity(cfg.detections_per_trajectory),
        losses: Vec::with_capacity(cfg.detections_per_trajectory),
        post_selected: Vec::with_capacity(cfg.detections_per_trajectory),
        mean_x: Vec::with_capacity(cfg.detections_per_trajectory),
        aborted: false,
        max_lost_mass: T::zero(),
    };

    'cycles: for cycle in 0..cfg.burn_in + cfg.detections_per_trajectory {
        let recording = cycle >= cfg.burn_in;
        let mut losses = 0u32;
        loop {
            if !(T::unit(&mut rng) < cfg.efficiency) {
                // Undetected emission: transverse recoil kick. The kick is a
                // known rigid boost, so it goes straight into the frame
                // momentum instead of the array.
                losses += 1;
                frame_p = frame_p + recoil.sample(&mut rng);
                continue;
            }
            let emission = imaging.emit_with_probability(&psi, T::of(2.0), &mut rng);
            match emission {
                Ok(out) => {
                    debug_assert!(out.detected);
                    let before = psi.moments().mean;
                    let after = out.posterior.moments().mean;
                    psi = out.posterior;
                    if recording {
                        record.delta_mean_x.push(after - before);
                        record.losses.push(losses);
                        record
                            .post_selected
                            .push(losses == 0 || cfg.post_select == PostSelectPolicy::None);
                        record.mean_x.push(frame_x + after);
                    }
                }
                Err(Error::NullPosterior { .. }) => {
                    record.aborted = true;
                    break 'cycles;
                }
                Err(e) => return Err(e),
            }
            break;
        }
        if record.aborted {
            break;
        }

        // re-center the frame on the packet
        let steps = cfg.grid.steps_from_zero(psi.moments().mean);
        if steps != 0 {
            match psi.translate_steps(-steps) {
                Ok(shifted) => {
                    psi = shifted;
                    frame_x = frame_x + cfg.grid.step() * T::of(steps as f64);
                }
                Err(Error::NullPosterior { .. }) => {
                    record.aborted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let p_rel = psi.momentum_mean();
        psi = psi.boost(-p_rel);
        frame_p = frame_p + p_rel;

        match quarter.apply(&psi) {
            Ok((next, lost)) => {
                record.max_lost_mass = record.max_lost_mass.max(lost);
                psi = next;
                let (fx, fp) = (frame_x, frame_p);
                frame_x = fp * x0_sq;
                frame_p = -fx / x0_sq;
            }
            Err(Error::NullPosterior { .. }) => {
                record.aborted = true;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(record)
}

/// Width statistics of the jump distribution: `sigma_1` the IQR of single
/// jumps, `sigma_2` the IQR of disjoint pairwise sums, and
/// `beta = log2(sigma_2 / sigma_1)` with a percentile-bootstrap CI.
/// Exactly scale-invariant: rescaling every sample leaves beta unchanged.
#[derive(Debug, Clone, Copy)]
pub struct BetaEstimate<T> {
    pub sigma1: T,
    pub sigma2: T,
    pub beta: T,
    pub ci: (T, T),
    pub se: T,
    pub samples: usize,
}

/// Disjoint pairing of sample `i` with sample `i + n/2`: sums of two
/// effectively independent draws, widely separated in the record so that
/// residual serial correlation between neighboring detections cancels.
fn pair_sums<T: Scalar>(samples: &[T]) -> Vec<T> {
    let half = samples.len() / 2;
    (0..half).map(|i| samples[i] + samples[i + half]).collect()
}

fn beta_of<T: Scalar>(samples: &[T]) -> T {
    let sigma1 = stats::iqr(samples);
    let sigma2 = stats::iqr(&pair_sums(samples));
    (sigma2 / sigma1).ln() / T::LN_2()
}

pub fn beta_estimator<T: Scalar, R: Rng + ?Sized>(
    samples: &[T],
    resamples: usize,
    rng: &mut R,
) -> Result<BetaEstimate<T>> {
    if samples.len() < 200 {
        return Err(Error::InsufficientSamples {
            got: samples.len(),
            need: 200,
        });
    }
    let sigma1 = stats::iqr(samples);
    let sigma2 = stats::iqr(&pair_sums(samples));
    let beta = (sigma2 / sigma1).ln() / T::LN_2();

    let n = samples.len();
    let mut boot = Vec::with_capacity(resamples);
    let mut buf = vec![T::zero(); n];
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = samples[rng.random_range(0..n)];
        }
        boot.push(beta_of(&buf));
    }
    let se = stats::variance(&boot).sqrt();
    boot.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(BetaEstimate {
        sigma1,
        sigma2,
        beta,
        ci: (
            stats::quantile_sorted(&boot, 0.025),
            stats::quantile_sorted(&boot, 0.975),
        ),
        se,
        samples: n,
    })
}

#[derive(Debug)]
pub struct DiffusionEnsemble<T> {
    pub records: Vec<DiffusionRecord<T>>,
    pub beta: BetaEstimate<T>,
    pub aborted: usize,
    pub pooled_samples: usize,
}

/// Pool the post-selected jumps of completed trajectories and estimate beta.
pub fn assemble_diffusion<T: Scalar>(
    cfg: &DiffusionConfig<T>,
    records: Vec<DiffusionRecord<T>>,
) -> Result<DiffusionEnsemble<T>> {
    let aborted = records.iter().filter(|r| r.aborted).count();
    let mut pool = Vec::new();
    for rec in records.iter().filter(|r| !r.aborted) {
        for (dx, &keep) in rec.delta_mean_x.iter().zip(rec.post_selected.iter()) {
            if keep {
                pool.push(*dx);
            }
        }
    }
    let mut rng = stream_rng(cfg.master_seed, u64::MAX - 1);
    let beta = beta_estimator(&pool, 1000, &mut rng)?;
    Ok(DiffusionEnsemble {
        records,
        beta,
        aborted,
        pooled_samples: pool.len(),
    })
}

/// Run the whole ensemble sequentially. Each trajectory draws its own RNG
/// stream from `(master_seed, index)`, so callers that parallelize over
/// `diffusion_trajectory` reproduce this result bit for bit.
pub fn run_diffusion_ensemble<T: Scalar>(cfg: &DiffusionConfig<T>) -> Result<DiffusionEnsemble<T>> {
    let aperture = cfg.aperture()?;
    let mut records = Vec::with_capacity(cfg.trajectories);
    for idx in 0..cfg.trajectories {
        records.push(diffusion_trajectory(cfg, &aperture, idx as u64)?);
    }
    assemble_diffusion(cfg, records)
}
