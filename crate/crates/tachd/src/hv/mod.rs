//! Bipolar hypervector algebra.
//!
//! The crate works in a multiply-add-permute space: hypervectors are dense
//! arrays of `+1`/`-1` elements (sums of them take intermediate integer
//! values), combined with three operations.
//!
//! * [`bundle`] — elementwise addition. The result is *similar* to each
//!   input; it acts as the set/superposition operator.
//! * [`bind`] — elementwise multiplication. The result is *dissimilar* to
//!   both inputs and distributes over bundling; it acts as the
//!   association/role-filler operator. On bipolar vectors it is its own
//!   inverse.
//! * [`permute`] — cyclic rotation. `permute(h, 1)` moves each element one
//!   position to the right; it encodes sequence order and is invertible by
//!   the opposite shift.
//!
//! Similarity is measured with [`cosine_sim`]. Independently drawn random
//! hypervectors are quasi-orthogonal at high dimension: their cosine
//! concentrates near zero, which is what lets thousands of items share one
//! space without colliding.

pub mod basis;

pub use basis::{level_flips, level_index, LevelBasis, RandomBasis};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// A dense hypervector with `f32` elements.
///
/// Elements are bipolar (`±1`) when freshly drawn and integer-valued after
/// bundling/binding chains; real-valued encodings (for example sinusoid
/// projections) use the same type. All arithmetic in the crate keeps these
/// values well inside the range where `f32` is exact for integers, so
/// integer-built vectors compare bitwise across platforms.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypervector {
    elems: Vec<f32>,
}

impl Hypervector {
    /// Wraps raw elements.
    pub fn from_elems(elems: Vec<f32>) -> Self {
        Hypervector { elems }
    }

    /// An all-zero vector of dimension `d`.
    pub fn zeros(d: usize) -> Self {
        Hypervector { elems: vec![0.0; d] }
    }

    /// Dimensionality.
    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.elems
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.elems
    }

    pub fn into_elems(self) -> Vec<f32> {
        self.elems
    }

    /// `self += k * other`.
    pub fn scaled_add(&mut self, other: &Hypervector, k: f32) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.elems.iter_mut().zip(&other.elems) {
            *a += k * b;
        }
    }

    /// Euclidean norm, accumulated in `f64`.
    pub fn norm(&self) -> f64 {
        self.elems.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt()
    }
}

/// Draws a random bipolar hypervector; each element is `+1` or `-1` with
/// equal probability.
pub fn random_hv(rng: &mut Rng, d: usize) -> Result<Hypervector> {
    if d == 0 {
        return Err(Error::InvalidDimension("hypervector dimension must be positive".into()));
    }
    let mut elems = vec![0.0f32; d];
    rng.fill_bipolar(&mut elems);
    Ok(Hypervector { elems })
}

/// Bundles (elementwise-adds) a set of hypervectors.
pub fn bundle(vectors: &[Hypervector]) -> Result<Hypervector> {
    let first = vectors.first().ok_or_else(|| Error::EmptyInput("bundle of no vectors".into()))?;
    let mut out = first.clone();
    for v in &vectors[1..] {
        if v.dim() != out.dim() {
            return Err(Error::DimMismatch { left: out.dim(), right: v.dim() });
        }
        for (a, b) in out.elems.iter_mut().zip(&v.elems) {
            *a += b;
        }
    }
    Ok(out)
}

/// Binds (elementwise-multiplies) two hypervectors.
pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { left: a.dim(), right: b.dim() });
    }
    let elems = a.elems.iter().zip(&b.elems).map(|(x, y)| x * y).collect();
    Ok(Hypervector { elems })
}

/// Cyclically rotates a hypervector `shift` positions to the right.
///
/// `permute(h, 1)` maps `[a, b, c, d]` to `[d, a, b, c]`; negative shifts
/// rotate left, and shifts wrap modulo the dimension, so
/// `permute(permute(h, i), -i)` is the identity.
pub fn permute(h: &Hypervector, shift: i64) -> Hypervector {
    let d = h.dim();
    let mut out = h.clone();
    if d == 0 {
        return out;
    }
    let r = shift.rem_euclid(d as i64) as usize;
    out.elems.rotate_right(r);
    out
}

/// Cosine similarity between two hypervectors.
///
/// Errors if either operand has zero norm, where the quantity is undefined.
pub fn cosine_sim(a: &Hypervector, b: &Hypervector) -> Result<f32> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { left: a.dim(), right: b.dim() });
    }
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.elems.iter().zip(&b.elems) {
        dot += x as f64 * y as f64;
        na += x as f64 * x as f64;
        nb += y as f64 * y as f64;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())) as f32)
}

/// Quantizes a hypervector to bipolar form: positive and zero elements map
/// to `+1`, negative elements to `-1`.
pub fn sign_quantize(h: &Hypervector) -> Hypervector {
    let elems = h.elems.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
    Hypervector { elems }
}
