//! Deterministic stream seeding for parallel ensembles.
//!
//! Every trajectory, realization, or worker derives its generator from
//! `(master_seed, stream_index)` alone, so results are independent of worker
//! count and scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for one logical stream of an ensemble.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
