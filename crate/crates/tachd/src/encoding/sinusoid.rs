//! Nonlinear random projection of whole windows.

use crate::error::{Error, Result};
use crate::features::RawWindow;
use crate::hv::Hypervector;
use crate::rng::Rng;

/// Sinusoid projection encoder: the flattened window `v` (sample-major
/// `[x0, y0, z0, x1, y1, z1, ...]`) is projected through a Gaussian matrix
/// and passed through a paired sinusoid nonlinearity,
///
/// ```text
/// H[i] = cos(W_i . v + b_i) * sin(W_i . v)
/// ```
///
/// with `W ~ N(0,1)` elementwise and `b ~ U[0, tau)`. Nearby windows keep a
/// high cosine because every phase moves only slightly; unrelated windows
/// land on unrelated phases.
#[derive(Clone, Debug)]
pub struct SinusoidProjection {
    dim: usize,
    input_len: usize,
    /// Row-major `dim x input_len` weights.
    w: Vec<f32>,
    b: Vec<f32>,
}

impl SinusoidProjection {
    /// Draws a fresh projection. `w_rng` supplies the weight rows (row-major)
    /// and `b_rng` the phase offsets, so both are stable under config
    /// changes elsewhere.
    pub fn new(w_rng: &mut Rng, b_rng: &mut Rng, dim: usize, input_len: usize) -> Result<Self> {
        if dim == 0 || input_len == 0 {
            return Err(Error::InvalidDimension(
                "projection needs positive output and input dimensions".into(),
            ));
        }
        let w = (0..dim * input_len).map(|_| w_rng.standard_normal() as f32).collect();
        let b = (0..dim).map(|_| b_rng.uniform(0.0, std::f64::consts::TAU) as f32).collect();
        Ok(SinusoidProjection { dim, input_len, w, b })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    /// Encodes a flat input vector.
    pub fn encode_vec(&self, v: &[f32]) -> Result<Hypervector> {
        if v.len() != self.input_len {
            return Err(Error::DimMismatch { left: v.len(), right: self.input_len });
        }
        let mut out = vec![0.0f32; self.dim];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.w[i * self.input_len..(i + 1) * self.input_len];
            let mut z = 0.0f64;
            for (wj, vj) in row.iter().zip(v) {
                z += *wj as f64 * *vj as f64;
            }
            *o = ((z + self.b[i] as f64).cos() * z.sin()) as f32;
        }
        Ok(Hypervector::from_elems(out))
    }

    /// Encodes a window by flattening it sample-major.
    pub fn encode(&self, window: &RawWindow) -> Result<Hypervector> {
        let mut v = Vec::with_capacity(window.len() * 3);
        for s in window.samples() {
            v.extend_from_slice(s);
        }
        self.encode_vec(&v)
    }

    /// Re-draws the full weight row and phase offset of each given output
    /// dimension.
    pub fn regenerate_dims(&mut self, dims: &[usize], rng: &mut Rng) {
        for &i in dims {
            for wj in &mut self.w[i * self.input_len..(i + 1) * self.input_len] {
                *wj = rng.standard_normal() as f32;
            }
            self.b[i] = rng.uniform(0.0, std::f64::consts::TAU) as f32;
        }
    }

    /// Overwrites one projection row; handy for injecting externally chosen
    /// projections.
    pub fn set_row(&mut self, i: usize, weights: &[f32], bias: f32) -> Result<()> {
        if weights.len() != self.input_len {
            return Err(Error::DimMismatch { left: weights.len(), right: self.input_len });
        }
        self.w[i * self.input_len..(i + 1) * self.input_len].copy_from_slice(weights);
        self.b[i] = bias;
        Ok(())
    }
}
