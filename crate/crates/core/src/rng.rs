//! Reproducible random streams.
//!
//! Every randomized step takes an explicit `rng_seed`. Independent work items
//! (one random function per trial, say) draw from separate ChaCha streams so
//! results do not depend on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn seeded(rng_seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(rng_seed)
}

/// Stream `index` of the family keyed by `rng_seed`.
pub fn stream(rng_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer; used as a cheap keyed hash for virtual tables.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
