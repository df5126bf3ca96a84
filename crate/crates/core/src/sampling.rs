//! Seeded random sources: uniform samples, rejection sampling of the free
//! space, and Poisson sample counts.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`). A stream
//! is keyed by a 64-bit seed (expanded to a 256-bit key by
//! `SeedableRng::seed_from_u64`) and a 64-bit stream number selecting one of
//! 2^64 independent keystreams. Monte Carlo trial `i` uses stream `i`, so
//! trials never share state and results do not depend on scheduling. ChaCha is
//! specified on 32-bit words, which makes sequences identical on every
//! platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::geometry::{Point, Scenario};

/// Consecutive rejections after which `sample_free` gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: u64 = 1_000_000;

/// Poisson draws with a larger mean are split into chunks of at most this mean.
const POISSON_CHUNK: f64 = 500.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("no free sample after {0} consecutive rejections; the free space is (nearly) empty")]
    Degenerate(u64),
}

/// A reproducible stream of random numbers.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Independent stream number `stream` under the base `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// A point with i.i.d. uniform coordinates in (0, 1).
    pub fn sample_uniform(&mut self, d: usize) -> Point {
        Point::from_vec_unchecked((0..d).map(|_| self.uniform()).collect())
    }

    /// Rejection-samples uniform points until one lies in the free space.
    pub fn sample_free(&mut self, scenario: &Scenario) -> Result<Point, SamplingError> {
        for _ in 0..MAX_CONSECUTIVE_REJECTIONS {
            let p = self.sample_uniform(scenario.dim());
            if scenario.point_in_free(p.coords()) {
                return Ok(p);
            }
        }
        Err(SamplingError::Degenerate(MAX_CONSECUTIVE_REJECTIONS))
    }

    /// A Poisson(`lambda`) count by inversion; large means are split into a
    /// sum of independent Poisson chunks so `e^{-lambda}` never underflows.
    pub fn poisson_count(&mut self, lambda: f64) -> u64 {
        assert!(lambda > 0.0 && lambda.is_finite(), "Poisson mean must be positive");
        let chunks = (lambda / POISSON_CHUNK).ceil().max(1.0);
        let part = lambda / chunks;
        (0..chunks as u64).map(|_| self.poisson_inversion(part)).sum()
    }

    fn poisson_inversion(&mut self, lambda: f64) -> u64 {
        let u = self.uniform();
        let mut k = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
            // Rounding can leave the cdf just short of u far in the tail.
            if p == 0.0 && k as f64 > lambda {
                break;
            }
        }
        k
    }
}
