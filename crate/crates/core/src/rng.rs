//! Seeding rule shared by every stochastic routine.
//!
//! Replicate `r` of an experiment with base seed `s` is driven by
//! `ChaCha8Rng::seed_from_u64(s.wrapping_add(r))`, so results do not depend on
//! how replicates are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Recorded in output metadata next to the seed.
pub const GENERATOR_NAME: &str = "chacha8";

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replicate_seed(seed: u64, replicate: u64) -> u64 {
    seed.wrapping_add(replicate)
}

pub fn replicate_rng(seed: u64, replicate: u64) -> SimRng {
    seeded(replicate_seed(seed, replicate))
}
