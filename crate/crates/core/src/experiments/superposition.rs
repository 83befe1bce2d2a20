//! Preparing spatially separated superpositions by repeated emission.
//!
//! The atom starts in a broad trap ground state; the preparation (reset,
//! excite, emit) repeats until a photon is detected through the
//! double-Gaussian aperture, leaving two packets separated by 15 wavelengths
//! with widths near 1.5. The weighting of the packets follows the detection
//! location: the closer to zero, the more symmetric the superposition.

use crate::density::GridDensity;
use crate::error::Result;
use crate::grid::Grid;
use crate::optics::ApertureProfile;
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::state::{HarmonicTrap, PhotonImaging, WaveFunction};
use crate::stats;

#[derive(Debug, Clone)]
pub struct SuperpositionConfig<T> {
    pub grid: Grid<T>,
    pub trap: HarmonicTrap<T>,
    pub trials: usize,
    pub mirrors: u32,
    pub master_seed: u64,
}

impl<T: Scalar> SuperpositionConfig<T> {
    pub fn desk_default(master_seed: u64) -> Self {
        Self {
            grid: crate::optics::default_z_grid(),
            trap: HarmonicTrap {
                length_scale: T::of(60.0),
            },
            trials: 2000,
            mirrors: 1,
            master_seed,
        }
    }
}

/// Per-trial statistics of the prepared superpositions.
#[derive(Debug, Clone)]
pub struct SuperpositionStats<T> {
    pub trials: usize,
    pub detections: usize,
    pub emissions_total: u64,
    /// Probability of the smaller packet per detected trial.
    pub ps_values: Vec<T>,
    pub fraction_ps_ge_third: T,
    pub detection_locations: Vec<T>,
    pub separations: Vec<T>,
    pub packet_sigmas: Vec<T>,
    pub mean_separation: T,
    pub mean_packet_sigma: T,
}

/// Mass, mean, and standard deviation of a density restricted to one side
/// of a split point.
fn side_stats<T: Scalar>(density: &GridDensity<T>, split: T, right: bool) -> (T, T, T) {
    let mut mass = T::zero();
    let mut m1 = T::zero();
    let mut m2 = T::zero();
    for (i, &v) in density.values.iter().enumerate() {
        let x = density.grid.at(i);
        if (right && x >= split) || (!right && x < split) {
            let w = v * density.grid.step();
            mass = mass + w;
            m1 = m1 + w * x;
            m2 = m2 + w * x * x;
        }
    }
    if mass > T::zero() {
        let mean = m1 / mass;
        let var = (m2 / mass - mean * mean).max(T::zero());
        (mass, mean, var.sqrt())
    } else {
        (T::zero(), T::zero(), T::zero())
    }
}

/// Contiguous density segments above `rel_threshold` of the peak; returns
/// `(position, mass)` per packet.
pub fn dominant_packets<T: Scalar>(density: &GridDensity<T>, rel_threshold: T) -> Vec<(T, T)> {
    let peak = density.values.iter().cloned().fold(T::zero(), T::max);
    let cut = peak * rel_threshold;
    let mut packets = Vec::new();
    let mut current: Option<(T, T)> = None; // (mass, weighted position)
    for (i, &v) in density.values.iter().enumerate() {
        if v > cut {
            let w = v * density.grid.step();
            let x = density.grid.at(i);
            current = Some(match current {
                Some((m, mx)) => (m + w, mx + w * x),
                None => (w, w * x),
            });
        } else if let Some((m, mx)) = current.take() {
            packets.push((mx / m, m));
        }
    }
    if let Some((m, mx)) = current {
        packets.push((mx / m, m));
    }
    packets
}

/// Run the preparation protocol. Every undetected emission destroys the
/// spatial coherence, so each attempt restarts from the ground state; only
/// the statistics of detected trials are kept. Returns the last posterior
/// and the ensemble statistics.
pub fn prepare_superposition<T: Scalar>(
    cfg: &SuperpositionConfig<T>,
    aperture: &ApertureProfile<T>,
) -> Result<(WaveFunction<T>, SuperpositionStats<T>)> {
    let mut imaging = PhotonImaging::new(aperture, &cfg.grid, cfg.mirrors)?;
    let ground = WaveFunction::ground_state(cfg.grid, &cfg.trap)?;
    // the reset state never changes, so its detection density is fixed
    let p_detect = imaging.detection_probability(&ground);
    let detection_density = crate::state::detection_distribution(&ground, &imaging.detected)?;

    let mut rng = stream_rng(cfg.master_seed, 0);
    let mut emissions_total = 0u64;
    let mut ps_values = Vec::with_capacity(cfg.trials);
    let mut locations = Vec::with_capacity(cfg.trials);
    let mut separations = Vec::with_capacity(cfg.trials);
    let mut packet_sigmas = Vec::with_capacity(cfg.trials);
    let mut last = ground.clone();

    for _ in 0..cfg.trials {
        // reset-and-emit until detected; undetected attempts are discarded
        loop {
            emissions_total += 1;
            if T::unit(&mut rng) < p_detect {
                break;
            }
        }
        let a = cfg
            .grid
            .at(cfg.grid.nearest(detection_density.sample(&mut rng)));
        let posterior = ground.apply_collapse(&imaging.detected, a)?;
        let density = posterior.density();
        let (mass_l, mean_l, sd_l) = side_stats(&density, a, false);
        let (mass_r, mean_r, sd_r) = side_stats(&density, a, true);
        ps_values.push(mass_l.min(mass_r));
        locations.push(a);
        separations.push(mean_r - mean_l);
        packet_sigmas.push((sd_l + sd_r) * T::of(0.5));
        last = posterior;
    }

    let third = T::of(1.0 / 3.0);
    let ge_third = ps_values.iter().filter(|&&p| p >= third).count();
    let stats = SuperpositionStats {
        trials: cfg.trials,
        detections: cfg.trials,
        emissions_total,
        fraction_ps_ge_third: T::of(ge_third as f64 / cfg.trials.max(1) as f64),
        mean_separation: stats::mean(&separations),
        mean_packet_sigma: stats::mean(&packet_sigmas),
        ps_values,
        detection_locations: locations,
        separations,
        packet_sigmas,
    };
    Ok((last, stats))
}
