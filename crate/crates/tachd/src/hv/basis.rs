//! Item memories: random and level (thermometer) bases.

use crate::error::{Error, Result};
use crate::hv::{random_hv, Hypervector};
use crate::rng::Rng;

/// Maps a value to its nearest of `levels` indices over `[lo, hi]`,
/// clamping values outside the range.
pub fn level_index(value: f64, lo: f64, hi: f64, levels: usize) -> Result<usize> {
    if !value.is_finite() {
        return Err(Error::InvalidValue(format!("cannot quantize non-finite value {value}")));
    }
    let t = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
    Ok((t * (levels - 1) as f64).round() as usize)
}

/// Number of flipped positions at `level` in a `levels`-step basis of
/// dimension `dim`: `ceil(dim * level / (levels - 1))`.
pub fn level_flips(dim: usize, levels: usize, level: usize) -> usize {
    let num = dim as u64 * level as u64;
    let den = (levels - 1) as u64;
    num.div_ceil(den) as usize
}

/// A set of independently drawn bipolar hypervectors, used for categorical
/// symbols such as the per-axis key vectors.
#[derive(Clone, Debug)]
pub struct RandomBasis {
    dim: usize,
    vectors: Vec<Hypervector>,
}

impl RandomBasis {
    pub fn new(rng: &mut Rng, dim: usize, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig("random basis needs at least one vector".into()));
        }
        let vectors = (0..count).map(|_| random_hv(rng, dim)).collect::<Result<Vec<_>>>()?;
        Ok(RandomBasis { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &Hypervector {
        &self.vectors[i]
    }

    /// Re-draws the elements of every vector at the given dimensions.
    ///
    /// Dimensions are visited in ascending order and vectors in index order,
    /// so the result is a pure function of `(self, dims, rng)`.
    pub fn regenerate_dims(&mut self, dims: &[usize], rng: &mut Rng) {
        let mut dims = dims.to_vec();
        dims.sort_unstable();
        dims.dedup();
        for &j in &dims {
            for v in &mut self.vectors {
                v.as_mut_slice()[j] = rng.bipolar();
            }
        }
    }
}

/// A level basis: `levels` hypervectors spanning a closed value range with
/// similarity that decays monotonically in level distance.
///
/// Level 0 and level `levels - 1` are independent random vectors. Walking up
/// the levels flips positions from the base vector's value to the end
/// vector's value in a fixed random order, so the flips are nested: level
/// `i    ` has the first `ceil(dim * i / (levels - 1))` positions (in flip
/// order) carrying the end vector's elements and the rest carrying the base
/// vector's. Neighbouring levels therefore stay similar while the extremes
/// are as dissimilar as two random vectors.
#[derive(Clone, Debug)]
pub struct LevelBasis {
    dim: usize,
    levels: usize,
    lo: f64,
    hi: f64,
    base: Vec<f32>,
    end: Vec<f32>,
    /// `rank[j]` = position of dimension `j` in the flip order.
    rank: Vec<u32>,
    vectors: Vec<Hypervector>,
}

impl LevelBasis {
    pub fn new(rng: &mut Rng, dim: usize, levels: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("level basis dimension must be positive".into()));
        }
        if levels < 2 {
            return Err(Error::InvalidConfig(format!("level basis needs >= 2 levels, got {levels}")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!("level basis range must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        let base = random_hv(rng, dim)?.into_elems();
        let end = random_hv(rng, dim)?.into_elems();
        let perm = rng.permutation(dim);
        let mut rank = vec![0u32; dim];
        for (order, &j) in perm.iter().enumerate() {
            rank[j as usize] = order as u32;
        }
        let mut basis = LevelBasis { dim, levels, lo, hi, base, end, rank, vectors: Vec::new() };
        basis.materialize();
        Ok(basis)
    }

    fn materialize(&mut self) {
        self.vectors = (0..self.levels)
            .map(|lvl| {
                let flips = self.flip_count(lvl) as u32;
                let elems = (0..self.dim)
                    .map(|j| if self.rank[j] < flips { self.end[j] } else { self.base[j] })
                    .collect();
                Hypervector::from_elems(elems)
            })
            .collect();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Number of positions carrying the end vector's value at `level`:
    /// `ceil(dim * level / (levels - 1))`.
    pub fn flip_count(&self, level: usize) -> usize {
        level_flips(self.dim, self.levels, level)
    }

    pub fn vector(&self, level: usize) -> &Hypervector {
        &self.vectors[level]
    }

    /// Maps a value to its nearest level index. Values outside the fitted
    /// range clamp to the end levels.
    pub fn level_of(&self, value: f64) -> Result<usize> {
        level_index(value, self.lo, self.hi, self.levels)
    }

    /// Quantizes a value to its level hypervector.
    pub fn quantize(&self, value: f64) -> Result<&Hypervector> {
        Ok(self.vector(self.level_of(value)?))
    }

    /// Element of the `level` vector at dimension `j`, computed from the
    /// generator state in O(1).
    pub fn value_at(&self, level: usize, j: usize) -> f32 {
        if (self.rank[j] as usize) < self.flip_count(level) {
            self.end[j]
        } else {
            self.base[j]
        }
    }

    /// Re-draws base and end elements at the given dimensions and updates
    /// every materialized level vector there. The flip order is preserved.
    pub fn regenerate_dims(&mut self, dims: &[usize], rng: &mut Rng) {
        let mut dims = dims.to_vec();
        dims.sort_unstable();
        dims.dedup();
        for &j in &dims {
            self.base[j] = rng.bipolar();
            self.end[j] = rng.bipolar();
        }
        for lvl in 0..self.levels {
            let flips = self.flip_count(lvl) as u32;
            for &j in &dims {
                self.vectors[lvl].as_mut_slice()[j] =
                    if self.rank[j] < flips { self.end[j] } else { self.base[j] };
            }
        }
    }
}
