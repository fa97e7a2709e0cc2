//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed from a master seed and a stream label, so parallel or reordered work
//! stays reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `(master, stream)`.
pub fn derive(master: u64, stream: u64) -> u64 {
    mix(mix(master) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(master: u64, stream: u64) -> ChaCha8Rng {
    rng(derive(master, stream))
}
