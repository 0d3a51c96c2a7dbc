//! Seed derivation. Every random draw in the crate comes from a
//! [`ChaCha8Rng`] seeded from a 64-bit value, so results are reproducible
//! across platforms and thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// splitmix64 finalizer.
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a base seed together with an ordered list of words.
pub fn mix(base: u64, words: &[u64]) -> u64 {
    let mut h = avalanche(base ^ 0x9e37_79b9_7f4a_7c15);
    for &w in words {
        h = avalanche(h.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ avalanche(w));
    }
    h
}

/// Independent sub-streams of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Operator = 1,
    Signal = 2,
    Dither = 3,
    Diagnostics = 4,
}

pub fn substream(seed: u64, stream: Stream) -> u64 {
    mix(seed, &[stream as u64])
}
