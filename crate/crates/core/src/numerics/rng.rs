//! Deterministic random number generation.
//!
//! The bit stream is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`). A 64-bit
//! seed is expanded into the 256-bit ChaCha key with `SeedableRng::seed_from_u64`
//! (a PCG32 expansion whose output is fixed by `rand_core`), and independent
//! substreams use the ChaCha stream id. Normal variates come from the ziggurat
//! sampler of `rand_distr::StandardNormal`; uniform variates on `[-1, 1)` from
//! `rand`'s `Uniform<f64>`. Both are integer driven and therefore identical on
//! every platform for a fixed crate version.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

/// Seeded deterministic generator. Single owner; clone to fork the exact state.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn seed(seed: u64) -> Self {
        Rng { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `stream` under the same seed.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        Uniform::new(lo, hi).expect("finite bounds").sample(&mut self.inner)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.random_range(lo..=hi)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        mean + std * self.standard_normal()
    }

    /// Uniform on `[-1, 1]`.
    pub fn uniform_pm1(&mut self) -> f64 {
        Uniform::new_inclusive(-1.0, 1.0).expect("finite bounds").sample(&mut self.inner)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.int_inclusive(0, i);
            items.swap(i, j);
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of sweep cell `cell`:
/// `mix64(mix64(mix64(base) ^ cell) ^ trial)`.
pub fn derive_seed(base: u64, cell: u64, trial: u64) -> u64 {
    mix64(mix64(mix64(base) ^ cell) ^ trial)
}
