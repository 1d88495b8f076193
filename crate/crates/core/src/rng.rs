//! Deterministic RNG streams.
//!
//! Every random draw in an experiment comes from a stream keyed by a master seed
//! and a coordinate path, e.g. `(experiment, circuit, lambda, group)`. Results are
//! then independent of the order in which work units execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit key from a master seed and a coordinate path.
pub fn derive_key(master: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(mix(master), |acc, &c| mix(acc ^ mix(c.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn stream(master: u64, coords: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_key(master, coords))
}
