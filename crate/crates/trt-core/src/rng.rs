//! Counter-based random-number streams.
//!
//! Reproducibility across thread counts is a hard requirement for the
//! Monte-Carlo engine, so sampling cannot rely on a single sequential
//! generator: every sample index owns its own substream, derived only from
//! `(seed, stream_index)`.  Draws inside a substream come from the
//! splitmix64 output function applied to a Weyl sequence, which gives a
//! full-period, well-mixed generator that is cheap to construct per sample.
//!
//! Gaussian variates use the polar rejection method; a complex channel
//! entry consumes exactly one polar pair, so entry streams stay aligned
//! regardless of how many rejections occur.

use num_complex::Complex64;

use crate::error::Result;
use crate::math;
use crate::matrix::ComplexMatrix;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0x6A09_E667_F3BC_C909;

/// splitmix64 finalizer: bijective on `u64` with strong avalanche behavior.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a fresh 64-bit key from a master seed and an index.
///
/// Used by sweep drivers to give every `(rate, SNR)` grid point its own
/// seed while keeping any subset of the sweep reproducible in isolation.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ mix64(index ^ STREAM_SALT))
}

/// Deterministic substream of random draws.
///
/// A stream is fully determined by `(seed, stream_index)`; construction is
/// a couple of integer mixes, so building one per Monte-Carlo sample is
/// idiomatic.  Draw order within a stream matters, call order between
/// streams does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self {
            seed,
            stream_index,
            key: derive_seed(seed, stream_index),
            counter: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Next raw 64-bit draw.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Pair of independent standard normal draws (polar rejection method).
    #[inline]
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.next_uniform() - 1.0;
            let v = 2.0 * self.next_uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = math::sqrt(-2.0 * math::ln(s) / s);
                return (u * f, v * f);
            }
        }
    }

    /// Circularly-symmetric complex Gaussian draw with unit variance:
    /// real and imaginary parts are independent `N(0, 1/2)`.
    #[inline]
    pub fn next_complex_gaussian(&mut self) -> Complex64 {
        let (x, y) = self.next_gaussian_pair();
        Complex64::new(x * core::f64::consts::FRAC_1_SQRT_2, y * core::f64::consts::FRAC_1_SQRT_2)
    }
}

/// Draw an `n_rx x m_tx` i.i.d. Rayleigh channel matrix from `stream`.
///
/// Entries are unit-variance circularly-symmetric complex Gaussians, filled
/// in row-major order.  The same `(seed, stream_index)` always produces the
/// same matrix.
pub fn sample_channel(mut stream: RngStream, n_rx: usize, m_tx: usize) -> Result<ComplexMatrix> {
    let mut h = ComplexMatrix::zeros(n_rx, m_tx)?;
    fill_channel(&mut h, &mut stream);
    Ok(h)
}

/// In-place variant of [`sample_channel`] for allocation-free hot loops.
pub fn fill_channel(h: &mut ComplexMatrix, stream: &mut RngStream) {
    for entry in h.entries_mut() {
        *entry = stream.next_complex_gaussian();
    }
}
