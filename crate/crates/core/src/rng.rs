//! Seeded random streams.
//!
//! Every consumer of randomness derives its own ChaCha stream from the master
//! seed and a stream identifier, so results never depend on the order in which
//! parallel workers run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SpaRng = ChaCha8Rng;

const PARTICLE_BITS: u32 = 32;

/// Stream reserved for a single logical consumer.
pub fn stream(seed: u64, id: u64) -> SpaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Stream for the moves of particle `index` at SMC step `step`.
pub fn particle_stream(seed: u64, step: usize, index: usize) -> SpaRng {
    debug_assert!((index as u64) < (1 << PARTICLE_BITS) - 1);
    stream(seed, ((step as u64) << PARTICLE_BITS) | index as u64)
}

/// Stream for the resampling draw at SMC step `step`.
pub fn resample_stream(seed: u64, step: usize) -> SpaRng {
    stream(seed, ((step as u64) << PARTICLE_BITS) | ((1 << PARTICLE_BITS) - 1))
}

/// Named streams outside the per-step space (step index 0 is never a move step).
pub mod ids {
    pub const INIT_CHAIN: u64 = 1;
    pub const GENOTYPES: u64 = 2;
    pub const EFFECTS: u64 = 3;
    pub const PHENOTYPES: u64 = 4;
    pub const FIXED_CHAIN: u64 = 5;
}
