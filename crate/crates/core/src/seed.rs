//! Seed derivation.
//!
//! Every random decision in a run descends from one master seed through a
//! counter-based SplitMix64 mix, so a (project, repeat) cell, a tree inside an
//! ensemble, or an estimator shuffle can be reproduced in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a path of counters.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix(master.wrapping_add(GOLDEN)), |acc, &step| {
            mix(acc ^ mix(step.wrapping_add(GOLDEN)))
        })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
