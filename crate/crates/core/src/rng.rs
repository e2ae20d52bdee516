//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`ChaCha8Rng`], seeded from a
//! `u64`. The generator is portable across platforms, so masks, noise
//! realizations and the CSV snapshots built from them are stable.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Build the crate's generator from a seed.
pub fn from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed for stream `stream` of `seed`.
///
/// Uses two rounds of the SplitMix64 finalizer, so that (seed, trial) pairs
/// map to well-separated generator states regardless of evaluation order.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix(splitmix(seed) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
