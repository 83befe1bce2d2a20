//! Measurement records of the Poisson-subordinated process: each
//! photodetection is a jump contributing `dr = <X> + gamma dL_alpha`.

use rand::Rng;

use crate::error::Result;
use crate::levy::{sample_stable, StableParams, SubordinatedConfig};
use crate::scalar::Scalar;

/// Source of the conditioned mean entering each measurement result.
pub enum MeanFeed<'a, T> {
    Constant(T),
    /// One value per event, cycled if shorter than the record.
    Series(&'a [T]),
}

impl<T: Scalar> MeanFeed<'_, T> {
    fn at(&self, i: usize) -> T {
        match self {
            MeanFeed::Constant(x) => *x,
            MeanFeed::Series(s) => s[i % s.len()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainedRecord<T> {
    pub event_times: Vec<T>,
    /// Per-event results `dr_i = <X>_i + gamma dL_i`.
    pub increments: Vec<T>,
    /// Cumulative record.
    pub record: Vec<T>,
}

impl<T: Scalar> ChainedRecord<T> {
    /// Sum of the increments within `[t0, t1)`.
    pub fn increment_over(&self, t0: T, t1: T) -> T {
        let mut acc = T::zero();
        for (t, dr) in self.event_times.iter().zip(self.increments.iter()) {
            if *t >= t0 && *t < t1 {
                acc = acc + *dr;
            }
        }
        acc
    }
}

/// Generate the event-time measurement record of the subordinated process.
pub fn chained_measurement_record<T: Scalar, R: Rng + ?Sized>(
    cfg: &SubordinatedConfig<T>,
    feed: &MeanFeed<T>,
    rng: &mut R,
) -> Result<ChainedRecord<T>> {
    cfg.validate()?;
    let unit = StableParams::standard(cfg.alpha)?;
    let mut event_times = Vec::new();
    let mut increments = Vec::new();
    let mut record = Vec::new();
    let mut t = T::zero();
    let mut level = T::zero();
    let mut i = 0usize;
    loop {
        t = t - T::open01(rng).ln() / cfg.jump_rate;
        if t > cfg.horizon {
            break;
        }
        let dr = feed.at(i) + cfg.gamma * sample_stable(&unit, rng);
        level = level + dr;
        event_times.push(t);
        increments.push(dr);
        record.push(level);
        i += 1;
    }
    Ok(ChainedRecord {
        event_times,
        increments,
        record,
    })
}
