//! Class accumulators and nearest-class inference.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hv::{sign_quantize, Hypervector};

const MAGIC: &[u8; 8] = b"TACHDAM1";
const VERSION: u32 = 1;

/// An associative memory: one accumulator hypervector per class. Inference
/// returns the class whose accumulator has the highest cosine similarity to
/// the query; ties resolve to the lowest class index.
#[derive(Clone, Debug, PartialEq)]
pub struct AssociativeMemory {
    dim: usize,
    accumulators: Vec<Hypervector>,
}

impl AssociativeMemory {
    pub fn new(dim: usize, n_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("memory dimension must be positive".into()));
        }
        if n_classes < 2 {
            return Err(Error::InvalidConfig(format!(
                "memory needs at least 2 classes, got {n_classes}"
            )));
        }
        Ok(AssociativeMemory {
            dim,
            accumulators: vec![Hypervector::zeros(dim); n_classes],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.accumulators.len()
    }

    pub fn class_vector(&self, c: usize) -> &Hypervector {
        &self.accumulators[c]
    }

    /// `acc[c] += scale * h`.
    pub fn add(&mut self, c: usize, h: &Hypervector, scale: f32) -> Result<()> {
        if h.dim() != self.dim {
            return Err(Error::DimMismatch { left: h.dim(), right: self.dim });
        }
        self.accumulators[c].scaled_add(h, scale);
        Ok(())
    }

    /// Zeroes the given dimensions in every class accumulator.
    pub fn zero_dims(&mut self, dims: &[usize]) {
        for acc in &mut self.accumulators {
            let s = acc.as_mut_slice();
            for &j in dims {
                s[j] = 0.0;
            }
        }
    }

    /// Cosine similarities plus the norms they were computed from. A
    /// zero-norm operand yields similarity 0 instead of an error, which is
    /// what training needs while the memory is still empty.
    pub(crate) fn sims_full(&self, h: &Hypervector) -> (Vec<f32>, Vec<f64>, f64) {
        let hn = h.norm();
        let mut sims = Vec::with_capacity(self.accumulators.len());
        let mut norms = Vec::with_capacity(self.accumulators.len());
        for acc in &self.accumulators {
            let an = acc.norm();
            norms.push(an);
            if an == 0.0 || hn == 0.0 {
                sims.push(0.0);
                continue;
            }
            let dot: f64 = acc
                .as_slice()
                .iter()
                .zip(h.as_slice())
                .map(|(&a, &b)| a as f64 * b as f64)
                .sum();
            sims.push((dot / (an * hn)) as f32);
        }
        (sims, norms, hn)
    }

    /// Similarities with zero-norm operands treated as similarity 0.
    pub fn sims_lenient(&self, h: &Hypervector) -> Vec<f32> {
        self.sims_full(h).0
    }

    /// Index of the most similar class under lenient similarities; ties
    /// resolve to the lowest index.
    pub fn classify_lenient(&self, h: &Hypervector) -> (usize, Vec<f32>) {
        let sims = self.sims_lenient(h);
        let mut best = 0;
        for (c, &s) in sims.iter().enumerate().skip(1) {
            if s > sims[best] {
                best = c;
            }
        }
        (best, sims)
    }

    /// Strict inference: errors on an untrained class or a zero query.
    pub fn predict(&self, h: &Hypervector) -> Result<(usize, Vec<f32>)> {
        if h.dim() != self.dim {
            return Err(Error::DimMismatch { left: h.dim(), right: self.dim });
        }
        if h.norm() == 0.0 {
            return Err(Error::UndefinedSimilarity);
        }
        if let Some(c) = self.accumulators.iter().position(|a| a.norm() == 0.0) {
            return Err(Error::UntrainedModel(format!("class {c} accumulator is zero")));
        }
        Ok(self.classify_lenient(h))
    }

    /// A copy with every accumulator sign-quantized to bipolar form.
    pub fn quantized(&self) -> AssociativeMemory {
        AssociativeMemory {
            dim: self.dim,
            accumulators: self.accumulators.iter().map(sign_quantize).collect(),
        }
    }

    /// Writes the memory: magic, version, dimension, class count, then the
    /// accumulators as little-endian `f32`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(24 + self.n_classes() * self.dim * 4);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.dim as u64).to_le_bytes());
        buf.extend_from_slice(&(self.n_classes() as u32).to_le_bytes());
        for acc in &self.accumulators {
            for v in acc.as_slice() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    /// Reads a memory written by [`AssociativeMemory::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let fail = |msg: &str| Error::Format(format!("{}: {msg}", path.display()));
        if bytes.len() < 24 {
            return Err(fail("file too short for a model header"));
        }
        if &bytes[..8] != MAGIC {
            return Err(fail("bad magic; not a model file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(fail(&format!("unsupported model version {version}")));
        }
        let dim = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let classes = u32::from_le_bytes(bytes[20..24].try_into().unwrap()) as usize;
        if dim == 0 || classes < 2 {
            return Err(fail("degenerate dimensions in model header"));
        }
        let want = 24 + classes * dim * 4;
        if bytes.len() != want {
            return Err(fail(&format!("payload is {} bytes, expected {want}", bytes.len())));
        }
        let mut accumulators = Vec::with_capacity(classes);
        let mut off = 24;
        for _ in 0..classes {
            let mut elems = Vec::with_capacity(dim);
            for _ in 0..dim {
                elems.push(f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()));
                off += 4;
            }
            accumulators.push(Hypervector::from_elems(elems));
        }
        Ok(AssociativeMemory { dim, accumulators })
    }
}
