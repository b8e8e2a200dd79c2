//! Reproducible random streams addressed by `(seed, stream)`.
//!
//! Each stream is an independent ChaCha8 keystream, so parallel workers can
//! draw from `stream = worker index` and the result never depends on
//! scheduling.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` from the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Standard complex Gaussian, `E|g|^2 = 1`, by Box-Muller.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let radius = (-self.uniform_open().ln()).sqrt();
        Complex64::from_polar(radius, TAU * self.uniform())
    }
}
