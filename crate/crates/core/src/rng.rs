//! The documented uniform stream shared by all samplers.
//!
//! A stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`, optionally
//! switched to a numbered ChaCha stream. Each 64-bit output `x` maps to
//! `(x >> 11) * 2^-53`, a uniform on `[0, 1)` with 53 bits of precision.
//! ChaCha output is specified bit-for-bit, so streams agree across platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct UniformStream {
    inner: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Same seed, independent ChaCha stream number.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform on `(0, 1]`, safe to take the logarithm of.
    #[inline]
    pub fn next_open_closed(&mut self) -> f64 {
        1.0 - self.next_f64()
    }
}
