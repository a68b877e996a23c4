//! N-gram composition of symbol sequences.

use crate::error::{Error, Result};
use crate::hv::Hypervector;

/// Copies `src` right-rotated by `r` into `dst`.
fn copy_rotated(dst: &mut [f32], src: &[f32], r: usize) {
    let d = dst.len();
    dst[r..].copy_from_slice(&src[..d - r]);
    dst[..r].copy_from_slice(&src[d - r..]);
}

/// Multiplies `dst` elementwise by `src` right-rotated by `r`.
fn mul_rotated(dst: &mut [f32], src: &[f32], r: usize) {
    let d = dst.len();
    for (a, b) in dst[r..].iter_mut().zip(&src[..d - r]) {
        *a *= b;
    }
    for (a, b) in dst[..r].iter_mut().zip(&src[d - r..]) {
        *a *= b;
    }
}

/// Adds `src` right-rotated by `r` into `dst`.
pub(crate) fn add_rotated(dst: &mut [f32], src: &[f32], r: usize) {
    let d = dst.len();
    for (a, b) in dst[r..].iter_mut().zip(&src[..d - r]) {
        *a += b;
    }
    for (a, b) in dst[..r].iter_mut().zip(&src[d - r..]) {
        *a += b;
    }
}

/// N-gram encoding over a flat symbol buffer (`count` symbols of `d`
/// elements each): bundles, for every position `j`, the bound product of the
/// `n` symbols starting there, each permuted by its distance from the end of
/// the gram.
pub(crate) fn ngram_flat(symbols: &[f32], count: usize, d: usize, n: usize, out: &mut [f32]) {
    debug_assert_eq!(symbols.len(), count * d);
    debug_assert_eq!(out.len(), d);
    debug_assert!(n >= 1 && n <= count);
    let mut prod = vec![0.0f32; d];
    for j in 0..=count - n {
        copy_rotated(&mut prod, &symbols[j * d..(j + 1) * d], (n - 1) % d);
        for k in 1..n {
            let s = &symbols[(j + k) * d..(j + k + 1) * d];
            mul_rotated(&mut prod, s, (n - 1 - k) % d);
        }
        for (a, b) in out.iter_mut().zip(&prod) {
            *a += b;
        }
    }
}

/// Encodes a symbol sequence as bundled n-grams:
///
/// ```text
/// sum over j of  permute(sym[j], n-1) * permute(sym[j+1], n-2) * ... * sym[j+n-1]
/// ```
///
/// With `n = 1` this reduces to a plain bundle of the symbols. Errors if
/// `n` is zero or exceeds the sequence length, or if dimensions disagree.
pub fn encode_ngram(symbols: &[Hypervector], n: usize) -> Result<Hypervector> {
    let first = symbols
        .first()
        .ok_or_else(|| Error::EmptyInput("n-gram of an empty sequence".into()))?;
    let d = first.dim();
    if n == 0 || n > symbols.len() {
        return Err(Error::InvalidConfig(format!(
            "n-gram size {n} outside 1..={} (sequence length)",
            symbols.len()
        )));
    }
    if let Some(bad) = symbols.iter().find(|s| s.dim() != d) {
        return Err(Error::DimMismatch { left: d, right: bad.dim() });
    }
    let mut flat = Vec::with_capacity(symbols.len() * d);
    for s in symbols {
        flat.extend_from_slice(s.as_slice());
    }
    let mut out = vec![0.0f32; d];
    ngram_flat(&flat, symbols.len(), d, n, &mut out);
    Ok(Hypervector::from_elems(out))
}
