//! Seeding conventions shared by every stochastic routine.
//!
//! All generators are ChaCha20 streams. Parallel work is split into a fixed
//! number of shards, each seeded from the caller's seed through splitmix64,
//! so results depend only on `(seed, shard count)` and not on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name recorded in reports that carry a seed.
pub const GENERATOR: &str = "chacha20";

/// Shards used by the parallel Monte Carlo and sampling paths.
pub const DEFAULT_SHARDS: usize = 16;

/// One step of the splitmix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for shard `index` of a run seeded with `seed`.
pub fn shard_seed(seed: u64, index: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ (index as u64).wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn shard_rng(seed: u64, index: usize) -> ChaCha20Rng {
    rng_from_seed(shard_seed(seed, index))
}

/// Splits `total` into `shards` near-equal parts, larger parts first.
pub fn shard_sizes(total: u64, shards: usize) -> Vec<u64> {
    let shards = shards.max(1) as u64;
    (0..shards)
        .map(|i| total / shards + u64::from(i < total % shards))
        .collect()
}
