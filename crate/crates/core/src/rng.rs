//! Deterministic random source.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded
//! through `SeedableRng::seed_from_u64`, which expands the 64-bit seed with the
//! PCG32 step (multiplier `6364136223846793005`, increment `11634580027462260723`)
//! into the 256-bit ChaCha key. ChaCha output is specified bit-for-bit, so the same
//! seed yields the same stream on every platform.
//!
//! Uniform doubles take the top 53 bits of a `u64` draw: `(x >> 11) * 2^-53`,
//! which lies in `[0, 1)`. Normal deviates use the Box–Muller transform
//! `sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)` and cache the sine half.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::complex::{CVector, Complex, UNDERFLOW_NORM};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// The `k`-th multistart stream derived from `seed` (`seed XOR k`).
    pub fn stream(seed: u64, k: u64) -> Self {
        Self::new(seed ^ k)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n` (n > 0).
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal deviate by Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        // 1 - u1 lies in (0, 1], so the log is finite
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    pub fn complex_normal(&mut self) -> Complex {
        let re = self.normal();
        let im = self.normal();
        Complex::new(re, im)
    }

    /// Uniform sample from the unit sphere of C^d.
    pub fn unit_vector(&mut self, d: usize) -> CVector {
        assert!(d >= 1, "dimension must be positive");
        loop {
            let v: CVector = (0..d).map(|_| self.complex_normal()).collect();
            if v.norm() > UNDERFLOW_NORM {
                return v.normalize().expect("norm checked above");
            }
        }
    }
}

/// Uniform sample from the unit sphere of C^d: `2d` independent standard
/// normals as real and imaginary parts, then normalized.
pub fn rand_unit_vector(d: usize, rng: &mut RngState) -> CVector {
    rng.unit_vector(d)
}
