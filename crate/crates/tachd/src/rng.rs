//! Deterministic randomness.
//!
//! Every stochastic component in the crate draws from a [`Rng`] seeded either
//! directly or through [`Rng::derive`]. The generator is ChaCha8, which is
//! fully specified and portable, so a given seed yields the same stream on
//! every platform and build. Labeled sub-streams keep components independent:
//! inserting a new consumer of randomness in one module does not shift the
//! draws seen by another.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// FNV-1a 64-bit hash, used to fold stream labels into seeds.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1_0000_01b3);
    }
    h
}

/// Seeded deterministic random source.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    /// Creates a generator from a bare seed.
    pub fn from_seed(seed: u64) -> Self {
        Rng { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// The seed this generator was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent generator for a named sub-stream.
    ///
    /// The child seed is `seed XOR fnv1a64(label)`, so the same `(seed,
    /// label)` pair always produces the same stream regardless of how much
    /// the parent has been consumed.
    pub fn derive(&self, label: &str) -> Rng {
        Rng::from_seed(self.seed ^ fnv1a64(label.as_bytes()))
    }

    /// Uniform draw from `[0, n)`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.gen_range(lo..hi)
    }

    /// A single bipolar element, `+1` or `-1` with equal probability.
    pub fn bipolar(&mut self) -> f32 {
        if self.inner.gen::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    /// Fills `out` with bipolar elements.
    pub fn fill_bipolar(&mut self, out: &mut [f32]) {
        for v in out {
            *v = self.bipolar();
        }
    }

    /// A standard normal draw via Box-Muller.
    pub fn standard_normal(&mut self) -> f64 {
        // gen::<f64>() is in [0, 1); flip to (0, 1] so the log is finite.
        let u1 = 1.0 - self.inner.gen::<f64>();
        let u2 = self.inner.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.inner.gen_range(0..=i);
            items.swap(i, j);
        }
    }

    /// A random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<u32> {
        let mut p: Vec<u32> = (0..n as u32).collect();
        self.shuffle(&mut p);
        p
    }
}
