//! Seeded generation of reproducible inputs.
//!
//! Uniform reals come from SplitMix64: the top 53 bits of each output word
//! scaled by 2^-53, giving values in `[0, 1)`. The mapping is fixed here
//! rather than delegated to `rand` distributions so that generated maps stay
//! identical across platforms and library versions.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::feature::FeatureMap;
use crate::real::Real;

pub struct SeededRng {
    inner: SplitMix64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { inner: SplitMix64::seed_from_u64(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `[0, n)`; `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }

    pub fn vec<T: Real>(&mut self, len: usize, lo: f64, hi: f64) -> Vec<T> {
        (0..len).map(|_| T::lit(self.uniform_in(lo, hi))).collect()
    }
}

/// Random `height x width x channels` map with entries uniform in `[0, 1)`.
pub fn random_feature_map<T: Real>(height: usize, width: usize, channels: usize, seed: u64) -> FeatureMap<T> {
    let mut rng = SeededRng::new(seed);
    let data = rng.vec(height * width * channels, 0.0, 1.0);
    FeatureMap::new(height, width, channels, data).expect("generated map is valid")
}
