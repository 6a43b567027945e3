//! Random numbers for the stochastic engine.
//!
//! One fixed, portable generator so trajectories are reproducible
//! across platforms and releases: ChaCha8, seeded per run. Replicate
//! streams are derived from the base seed with a SplitMix64 hash of the
//! replicate index, so adding replicates never perturbs existing ones.
//! [`GENERATOR_ID`] names this scheme in all output metadata.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identity and version of the RNG scheme, recorded in metadata files.
pub const GENERATOR_ID: &str = "chacha8+splitmix64/v1";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `replicate` under `base_seed`:
/// `splitmix64(base_seed + (replicate + 1) * golden_gamma)`.
pub fn split_seed(base_seed: u64, replicate: u64) -> u64 {
    mix(base_seed.wrapping_add(replicate.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seedable simulation RNG with the uniform draws the direct method needs.
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53-bit resolution.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform on `(0, 1]`, safe as an argument to `ln`.
    pub fn unit_positive(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }
}
