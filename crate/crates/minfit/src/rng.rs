//! Reproducible sampling.
//!
//! All randomness in the crate flows through [`Sampler`], a ChaCha12 stream
//! cipher keyed from a 64-bit seed (expanded with SplitMix64 by
//! `seed_from_u64`). Uniform variates take the top 53 bits of each 64-bit
//! word; normal variates use the Box-Muller cosine branch. The stream is
//! identical on every platform for a given seed.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::Error;
use crate::fitness::LognormalSpec;

/// Seed for a [`Sampler`]. Identical seeds yield bit-identical streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

const INV_2_POW_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Deterministic, seedable variate generator.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha12Rng,
}

impl Sampler {
    pub fn new(seed: RngSeed) -> Self {
        Sampler {
            rng: ChaCha12Rng::seed_from_u64(seed.0),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from [0, 1) with 53-bit resolution.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_POW_53
    }

    /// Uniform draw from (0, 1]; keeps `ln` finite in Box-Muller.
    fn uniform01_open_high(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * INV_2_POW_53
    }

    /// Standard normal via Box-Muller (cosine branch, two uniforms per draw).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform01_open_high();
        let u2 = self.uniform01();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Log-normal draw: `exp(mu + sigma * z)` with `z` standard normal.
    pub fn lognormal(&mut self, spec: &LognormalSpec) -> f64 {
        (spec.mu() + spec.sigma() * self.standard_normal()).exp()
    }

    pub fn uniform_in(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform01()
    }

    /// One draw from the categorical distribution given by `weights`.
    ///
    /// Weights need not be normalized. Returns `None` when the total weight
    /// is non-positive or non-finite. Zero-weight entries are never chosen.
    pub fn categorical(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let target = self.uniform01() * total;
        let mut acc = 0.0;
        let mut last_positive = None;
        for (index, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = Some(index);
                if target < acc {
                    return Some(index);
                }
            }
        }
        // Rounding can leave `target` marginally at or above the final
        // cumulative sum; fall back to the last positive-weight entry.
        last_positive
    }
}

/// Draws `count` log-normal fitness values for the given seed.
pub fn sample_lognormal(
    spec: &LognormalSpec,
    count: usize,
    seed: RngSeed,
) -> Result<Vec<f64>, Error> {
    if count == 0 {
        return Err(Error::InvalidParams(
            "sample count must be at least 1".into(),
        ));
    }
    let mut sampler = Sampler::new(seed);
    Ok((0..count).map(|_| sampler.lognormal(spec)).collect())
}
