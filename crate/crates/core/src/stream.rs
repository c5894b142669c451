//! Seeded pseudorandom streams.
//!
//! A [`RandomStream`] is a SplitMix64 generator owned by one caller. Streams
//! for Monte Carlo trials are derived from `(seed, trial, worker)` keys so
//! that any trial can be replayed independently of execution order, and so
//! that two policies simulated with the same seed see the same uniform draw
//! for the same worker in the same trial.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: SplitMix64,
}

fn mix(a: u64, b: u64) -> u64 {
    SplitMix64::seed_from_u64(a ^ b.wrapping_mul(GOLDEN_GAMMA)).next_u64()
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    /// Stream for worker `worker` in trial `trial` of a run seeded with `seed`.
    pub fn for_trial_worker(seed: u64, trial: u64, worker: u64) -> Self {
        Self::new(mix(mix(seed, trial), worker))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw on `(0, 1]`. Never returns 0.
    pub fn next_open_unit(&mut self) -> f64 {
        unit_from_word(self.next_u64())
    }

    /// Child stream whose seed is drawn from this one; deterministic given
    /// the parent's state.
    pub fn split(&mut self) -> Self {
        let child = mix(self.next_u64(), self.seed);
        Self::new(child)
    }
}

/// Maps a raw 64-bit word onto `(0, 1]` using its top 53 bits, so every
/// output is an exactly representable multiple of `2^-53`.
pub fn unit_from_word(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * TWO_POW_NEG_53
}
