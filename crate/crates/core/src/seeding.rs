//! Deterministic RNG streams keyed by `(seed, domain, stream)`.
//!
//! Every random draw in the crate goes through here so results depend only on
//! the seed and never on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Generator = 1,
    InitialStrategy = 2,
    OffsetFactors = 3,
    WeightNoise = 4,
    Bench = 5,
}

/// SplitMix64 finalizer; decorrelates nearby seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, domain: Domain, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(domain as u64)));
    rng.set_stream(stream);
    rng
}

/// Derives a child seed, e.g. the k-th resample of a conditioning step.
pub fn child(seed: u64, k: u64) -> u64 {
    mix(seed.wrapping_add(mix(k.wrapping_add(0xA5A5))))
}
