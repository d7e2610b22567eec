//! Reproducible random streams.
//!
//! Seeds for independent tasks (experiment cell, repetition, chain) are
//! derived by hashing a master seed with the task coordinates, so the stream
//! a task sees never depends on which thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `master` with a coordinate path into a new 64-bit seed.
///
/// Different paths (including paths that are prefixes of each other) give
/// unrelated seeds.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix(master);
    for (depth, &c) in path.iter().enumerate() {
        h = splitmix(h ^ splitmix(c.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN))));
    }
    splitmix(h ^ path.len() as u64)
}

/// A generator seeded from a 64-bit seed.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `seeded(derive_seed(master, path))`.
pub fn stream(master: u64, path: &[u64]) -> Rng {
    seeded(derive_seed(master, path))
}
