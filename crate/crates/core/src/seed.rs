//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`SeededRng`], which is
//! ChaCha8 (`rand_chacha`) keyed with `SeedableRng::seed_from_u64`. Both the
//! ChaCha stream and the PCG32 seed expansion used by `seed_from_u64` are
//! fixed algorithms, so results do not depend on the platform.
//!
//! Child seeds are derived rather than drawn, so any unit of work (one sample,
//! one rule count) can be recomputed in isolation:
//!
//! * split seeds: `seed XOR (sample_index * 0x9E3779B97F4A7C15)` (wrapping);
//! * everything else: [`derive_seed`], a SplitMix64 chain over a tag list.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the build/test split of sample `sample_index` (1-based).
pub fn split_seed(seed: u64, sample_index: usize) -> u64 {
    seed ^ (sample_index as u64).wrapping_mul(GOLDEN_GAMMA)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `parts` into `seed` one at a time: `h = splitmix64(h ^ part)`.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(seed), |h, &p| splitmix64(h ^ p))
}
