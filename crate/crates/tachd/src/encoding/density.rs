//! Feature-vector encoder over per-feature level structures.

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::hv::{level_flips, level_index, Hypervector};
use crate::rng::Rng;

/// Density encoder: every feature owns a private level structure — a base
/// vector, an end vector, and a flip order — built exactly like a level
/// basis but evaluated lazily. A feature's value picks a level, the level
/// picks how many positions show the end vector's elements, and the window
/// encoding is the bundle of all per-feature codes.
#[derive(Clone, Debug)]
pub struct DensityEncoder {
    dim: usize,
    levels: usize,
    ranges: Vec<(f64, f64)>,
    /// Feature-major `features x dim` element tables.
    base: Vec<f32>,
    end: Vec<f32>,
    /// Feature-major flip ranks.
    rank: Vec<u32>,
}

impl DensityEncoder {
    pub fn new(rng: &mut Rng, dim: usize, levels: usize, ranges: &[(f64, f64)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("density encoder dimension must be positive".into()));
        }
        if levels < 2 {
            return Err(Error::InvalidConfig(format!("density encoder needs >= 2 levels, got {levels}")));
        }
        if ranges.is_empty() {
            return Err(Error::InvalidConfig("density encoder needs at least one feature range".into()));
        }
        if let Some((lo, hi)) = ranges.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi))
        {
            return Err(Error::InvalidConfig(format!("feature range [{lo}, {hi}] invalid")));
        }
        let n = ranges.len();
        let mut base = vec![0.0f32; n * dim];
        let mut end = vec![0.0f32; n * dim];
        let mut rank = vec![0u32; n * dim];
        for k in 0..n {
            rng.fill_bipolar(&mut base[k * dim..(k + 1) * dim]);
            rng.fill_bipolar(&mut end[k * dim..(k + 1) * dim]);
            let perm = rng.permutation(dim);
            let slot = &mut rank[k * dim..(k + 1) * dim];
            for (order, &j) in perm.iter().enumerate() {
                slot[j as usize] = order as u32;
            }
        }
        Ok(DensityEncoder { dim, levels, ranges: ranges.to_vec(), base, end, rank })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_count(&self) -> usize {
        self.ranges.len()
    }

    /// Encodes a feature vector as the bundle of per-feature level codes.
    pub fn encode(&self, features: &FeatureVector) -> Result<Hypervector> {
        if features.len() != self.ranges.len() {
            return Err(Error::DimMismatch { left: features.len(), right: self.ranges.len() });
        }
        let mut out = vec![0.0f32; self.dim];
        for (k, &v) in features.values().iter().enumerate() {
            let (lo, hi) = self.ranges[k];
            let lvl = level_index(v, lo, hi, self.levels)?;
            let flips = level_flips(self.dim, self.levels, lvl) as u32;
            let base = &self.base[k * self.dim..(k + 1) * self.dim];
            let end = &self.end[k * self.dim..(k + 1) * self.dim];
            let rank = &self.rank[k * self.dim..(k + 1) * self.dim];
            for j in 0..self.dim {
                out[j] += if rank[j] < flips { end[j] } else { base[j] };
            }
        }
        Ok(Hypervector::from_elems(out))
    }

    /// Re-draws every feature's base and end elements at the given
    /// dimensions; flip orders are preserved.
    pub fn regenerate_dims(&mut self, dims: &[usize], rng: &mut Rng) {
        for k in 0..self.ranges.len() {
            for &j in dims {
                self.base[k * self.dim + j] = rng.bipolar();
                self.end[k * self.dim + j] = rng.bipolar();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::cosine_sim;

    fn enc(seed: u64, dim: usize, levels: usize, n_feats: usize) -> DensityEncoder {
        let ranges = vec![(0.0, 1.0); n_feats];
        DensityEncoder::new(&mut Rng::from_seed(seed), dim, levels, &ranges).unwrap()
    }

    fn fv(values: Vec<f64>) -> FeatureVector {
        FeatureVector::new(values).unwrap()
    }

    #[test]
    fn extremes_of_one_feature_are_quasi_orthogonal() {
        // A single feature at min vs max compares two independent random
        // vectors: |cosine| <= 0.05 at d = 10_000.
        for seed in 0..4u64 {
            let e = enc(seed, 10_000, 100, 1);
            let lo = e.encode(&fv(vec![0.0])).unwrap();
            let hi = e.encode(&fv(vec![1.0])).unwrap();
            let c = cosine_sim(&lo, &hi).unwrap();
            assert!(c.abs() <= 0.05, "extremes cosine {c}");
        }
    }

    #[test]
    fn similarity_decays_with_value_distance() {
        let e = enc(1, 8192, 100, 1);
        let a = e.encode(&fv(vec![0.0])).unwrap();
        let mut prev = 1.0f32;
        for step in 0..10 {
            let v = step as f64 / 9.0;
            let c = cosine_sim(&a, &e.encode(&fv(vec![v])).unwrap()).unwrap();
            assert!(c <= prev + 1e-6, "similarity must not increase with distance");
            prev = c;
        }
    }

    #[test]
    fn bundle_of_feature_codes() {
        // Output elements are sums of one bipolar element per feature, so
        // with k features they are integers of |v| <= k with matching parity.
        let e = enc(2, 512, 10, 7);
        let h = e.encode(&fv(vec![0.3; 7])).unwrap();
        for &v in h.as_slice() {
            assert_eq!(v, v.round());
            assert!(v.abs() <= 7.0);
            assert_eq!((v as i32).rem_euclid(2), 1, "sum of 7 odd terms is odd");
        }
    }

    #[test]
    fn clamps_out_of_range_values() {
        let e = enc(3, 256, 16, 2);
        let inside = e.encode(&fv(vec![0.0, 1.0])).unwrap();
        let outside = e.encode(&fv(vec![-9.0, 42.0])).unwrap();
        assert_eq!(inside, outside);
    }

    #[test]
    fn regenerate_localized() {
        let mut e = enc(4, 128, 8, 3);
        let x = fv(vec![0.2, 0.5, 0.9]);
        let before = e.encode(&x).unwrap();
        e.regenerate_dims(&[5, 77], &mut Rng::from_seed(50));
        let after = e.encode(&x).unwrap();
        for j in 0..128 {
            if j != 5 && j != 77 {
                assert_eq!(before.as_slice()[j], after.as_slice()[j]);
            }
        }
    }

    #[test]
    fn validation() {
        let mut rng = Rng::from_seed(5);
        assert!(DensityEncoder::new(&mut rng, 0, 4, &[(0.0, 1.0)]).is_err());
        assert!(DensityEncoder::new(&mut rng, 8, 1, &[(0.0, 1.0)]).is_err());
        assert!(DensityEncoder::new(&mut rng, 8, 4, &[]).is_err());
        assert!(DensityEncoder::new(&mut rng, 8, 4, &[(1.0, 1.0)]).is_err());
        let e = enc(6, 64, 4, 2);
        assert!(e.encode(&fv(vec![0.1])).is_err());
    }
}
