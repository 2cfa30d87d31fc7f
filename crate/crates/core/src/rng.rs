//! Seed derivation for reproducible trial batches.
//!
//! All randomness comes from ChaCha8 streams. A batch has one master seed;
//! trial `i` uses stream `i` of the generator keyed by the master seed, so
//! trials can run in any order or in parallel and still replay identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn master_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for trial `index` of the batch seeded with `master`.
pub fn trial_rng(master: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Deterministic 64-bit child seed, for components that take a plain seed.
pub fn child_seed(master: u64, index: u64) -> u64 {
    use rand::RngCore;
    trial_rng(master, index).next_u64()
}
