//! Deterministic seed derivation.
//!
//! Every random component (oracle measurement stream, estimator coordinate
//! selection, experiment-level draws) owns a ChaCha stream seeded from a
//! base seed plus a role tag, so runs are bit-reproducible and workers never
//! share generator state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates structured tag inputs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a list of role/index tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut acc = mix(base);
    for &t in tags {
        acc = mix(acc ^ mix(t));
    }
    acc
}

/// ChaCha stream for a derived seed.
pub fn stream(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}
