//! Key-value encoders over raw sample streams.
//!
//! Every timestep of a window becomes one symbol hypervector: each axis
//! value is mapped into the space by a per-axis value map and bound to that
//! axis's key vector, and the three bound pairs are bundled. A sequence mode
//! then turns the 400 symbols into a single window encoding — either by
//! bundling timestep-permuted symbols or by n-gram composition.

use crate::encoding::ngram::{add_rotated, ngram_flat};
use crate::error::{Error, Result};
use crate::features::RawWindow;
use crate::hv::{Hypervector, LevelBasis, RandomBasis};
use crate::rng::Rng;

/// Per-element sinusoid map of a scalar value:
/// `V(v)[i] = cos(w_i q + b_i) sin(w_i q)` where `q` is the value's position
/// in its fitted range scaled to `[0, tau]`, `w ~ N(0,1)` and
/// `b ~ U[0, tau)`. Nearby values land on nearby phases and stay similar;
/// values a full range apart decorrelate.
#[derive(Clone, Debug)]
pub struct ScalarSinusoid {
    w: Vec<f64>,
    b: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl ScalarSinusoid {
    pub fn new(rng: &mut Rng, dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("sinusoid map dimension must be positive".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!("sinusoid map range [{lo}, {hi}] invalid")));
        }
        let w: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        let b: Vec<f64> = (0..dim).map(|_| rng.uniform(0.0, std::f64::consts::TAU)).collect();
        Ok(ScalarSinusoid { w, b, lo, hi })
    }

    fn phase(&self, value: f64) -> f64 {
        let t = ((value - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        std::f64::consts::TAU * t
    }

    /// Evaluates the map into `out`.
    pub fn eval_into(&self, value: f64, out: &mut [f32]) {
        let q = self.phase(value);
        for (i, o) in out.iter_mut().enumerate() {
            let z = self.w[i] * q;
            *o = ((z + self.b[i]).cos() * z.sin()) as f32;
        }
    }

    pub fn regenerate_dims(&mut self, dims: &[usize], rng: &mut Rng) {
        for &j in dims {
            self.w[j] = rng.standard_normal();
            self.b[j] = rng.uniform(0.0, std::f64::consts::TAU);
        }
    }
}

/// Per-axis value map.
#[derive(Clone, Debug)]
pub enum AxisValueMap {
    Level(LevelBasis),
    Sinusoid(ScalarSinusoid),
}

/// How a symbol sequence becomes one window encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqMode {
    /// Bundle of timestep-permuted symbols: `sum over t of permute(sym_t, t)`.
    OrderPermute,
    /// Bundled n-grams of the symbol sequence.
    Ngram(usize),
}

/// Key-value encoder: three axis keys, three value maps, one sequence mode.
#[derive(Clone, Debug)]
pub struct KvEncoder {
    dim: usize,
    keys: RandomBasis,
    values: Vec<AxisValueMap>,
    mode: SeqMode,
}

impl KvEncoder {
    pub fn new(dim: usize, keys: RandomBasis, values: Vec<AxisValueMap>, mode: SeqMode) -> Result<Self> {
        if keys.len() != 3 || values.len() != 3 {
            return Err(Error::InvalidConfig("key-value encoder needs exactly 3 axes".into()));
        }
        if keys.dim() != dim {
            return Err(Error::DimMismatch { left: keys.dim(), right: dim });
        }
        if let SeqMode::Ngram(0) = mode {
            return Err(Error::InvalidConfig("n-gram size must be positive".into()));
        }
        Ok(KvEncoder { dim, keys, values, mode })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> SeqMode {
        self.mode
    }

    /// Builds the timestep symbol `sum over axes of key_a * V_a(value_a)`
    /// into `out`; `scratch` must be `dim` long.
    fn symbol_into(&self, sample: [f32; 3], out: &mut [f32], scratch: &mut [f32]) -> Result<()> {
        out.fill(0.0);
        for a in 0..3 {
            let key = self.keys.vector(a).as_slice();
            match &self.values[a] {
                AxisValueMap::Level(basis) => {
                    let lvl = basis.quantize(sample[a] as f64)?.as_slice();
                    for j in 0..self.dim {
                        out[j] += key[j] * lvl[j];
                    }
                }
                AxisValueMap::Sinusoid(map) => {
                    map.eval_into(sample[a] as f64, scratch);
                    for j in 0..self.dim {
                        out[j] += key[j] * scratch[j];
                    }
                }
            }
        }
        Ok(())
    }

    /// Encodes one window.
    pub fn encode(&self, window: &RawWindow) -> Result<Hypervector> {
        let t_count = window.len();
        let mut scratch = vec![0.0f32; self.dim];
        let mut out = vec![0.0f32; self.dim];
        match self.mode {
            SeqMode::OrderPermute => {
                let mut sym = vec![0.0f32; self.dim];
                for (t, &s) in window.samples().iter().enumerate() {
                    self.symbol_into(s, &mut sym, &mut scratch)?;
                    add_rotated(&mut out, &sym, t % self.dim);
                }
            }
            SeqMode::Ngram(n) => {
                if n > t_count {
                    return Err(Error::InvalidConfig(format!(
                        "n-gram size {n} exceeds window length {t_count}"
                    )));
                }
                let mut flat = vec![0.0f32; t_count * self.dim];
                for (t, &s) in window.samples().iter().enumerate() {
                    self.symbol_into(s, &mut flat[t * self.dim..(t + 1) * self.dim], &mut scratch)?;
                }
                ngram_flat(&flat, t_count, self.dim, n, &mut out);
            }
        }
        Ok(Hypervector::from_elems(out))
    }

    /// Re-draws keys and value-map state at the given dimensions.
    pub fn regenerate_dims(&mut self, dims: &[usize], rng: &mut Rng) {
        self.keys.regenerate_dims(dims, rng);
        for v in &mut self.values {
            match v {
                AxisValueMap::Level(basis) => basis.regenerate_dims(dims, rng),
                AxisValueMap::Sinusoid(map) => map.regenerate_dims(dims, rng),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::{bind, bundle, cosine_sim, permute};

    fn level_kv(seed: u64, dim: usize, mode: SeqMode) -> KvEncoder {
        let root = Rng::from_seed(seed);
        let keys = RandomBasis::new(&mut root.derive("keys"), dim, 3).unwrap();
        let values = ["x", "y", "z"]
            .iter()
            .map(|a| {
                AxisValueMap::Level(
                    LevelBasis::new(&mut root.derive(&format!("level.{a}")), dim, 16, -2.0, 2.0)
                        .unwrap(),
                )
            })
            .collect();
        KvEncoder::new(dim, keys, values, mode).unwrap()
    }

    fn window(seed: u64, len: usize) -> RawWindow {
        let mut rng = Rng::from_seed(seed);
        let samples = (0..len)
            .map(|_| {
                [
                    rng.uniform(-2.0, 2.0) as f32,
                    rng.uniform(-2.0, 2.0) as f32,
                    rng.uniform(-2.0, 2.0) as f32,
                ]
            })
            .collect();
        RawWindow::with_nominal_times("T", 0, samples).unwrap()
    }

    #[test]
    fn order_permute_matches_public_ops() {
        let enc = level_kv(1, 128, SeqMode::OrderPermute);
        let w = window(2, 5);
        let got = enc.encode(&w).unwrap();

        // Rebuild with the public hypervector operations.
        let root = Rng::from_seed(1);
        let keys = RandomBasis::new(&mut root.derive("keys"), 128, 3).unwrap();
        let bases: Vec<LevelBasis> = ["x", "y", "z"]
            .iter()
            .map(|a| {
                LevelBasis::new(&mut root.derive(&format!("level.{a}")), 128, 16, -2.0, 2.0).unwrap()
            })
            .collect();
        let mut parts = Vec::new();
        for (t, &s) in w.samples().iter().enumerate() {
            let sym = bundle(
                &(0..3)
                    .map(|a| {
                        bind(keys.vector(a), bases[a].quantize(s[a] as f64).unwrap()).unwrap()
                    })
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            parts.push(permute(&sym, t as i64));
        }
        assert_eq!(got, bundle(&parts).unwrap());
    }

    #[test]
    fn ngram_mode_matches_encode_ngram() {
        let enc = level_kv(3, 96, SeqMode::Ngram(3));
        let w = window(4, 7);
        let got = enc.encode(&w).unwrap();

        let plain = level_kv(3, 96, SeqMode::OrderPermute);
        let mut syms = Vec::new();
        let mut scratch = vec![0.0f32; 96];
        for &s in w.samples() {
            let mut buf = vec![0.0f32; 96];
            plain.symbol_into(s, &mut buf, &mut scratch).unwrap();
            syms.push(Hypervector::from_elems(buf));
        }
        assert_eq!(got, crate::encoding::encode_ngram(&syms, 3).unwrap());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let w = window(5, 20);
        let a = level_kv(7, 256, SeqMode::OrderPermute).encode(&w).unwrap();
        let b = level_kv(7, 256, SeqMode::OrderPermute).encode(&w).unwrap();
        let c = level_kv(8, 256, SeqMode::OrderPermute).encode(&w).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn similar_windows_encode_similarly() {
        let enc = level_kv(9, 4096, SeqMode::OrderPermute);
        let base = window(10, 50);
        // Tiny perturbation: same level cells almost everywhere.
        let bumped: Vec<[f32; 3]> = base
            .samples()
            .iter()
            .map(|s| [s[0] + 0.01, s[1], s[2]])
            .collect();
        let near = RawWindow::with_nominal_times("T", 0, bumped).unwrap();
        let far = window(11, 50);
        let e0 = enc.encode(&base).unwrap();
        let c_near = cosine_sim(&e0, &enc.encode(&near).unwrap()).unwrap();
        let c_far = cosine_sim(&e0, &enc.encode(&far).unwrap()).unwrap();
        assert!(c_near > 0.9, "c_near {c_near}");
        assert!(c_near > c_far, "near {c_near} vs far {c_far}");
    }

    #[test]
    fn sinusoid_value_map_runs() {
        let root = Rng::from_seed(12);
        let dim = 512;
        let keys = RandomBasis::new(&mut root.derive("keys"), dim, 3).unwrap();
        let values = ["x", "y", "z"]
            .iter()
            .map(|a| {
                AxisValueMap::Sinusoid(
                    ScalarSinusoid::new(&mut root.derive(&format!("sn.{a}")), dim, -2.0, 2.0)
                        .unwrap(),
                )
            })
            .collect();
        let enc = KvEncoder::new(dim, keys, values, SeqMode::OrderPermute).unwrap();
        let w = window(13, 30);
        let h = enc.encode(&w).unwrap();
        assert!(h.as_slice().iter().all(|v| v.is_finite()));
        assert!(h.norm() > 0.0);
        // Same value, same phase: deterministic repeat.
        assert_eq!(h, enc.encode(&w).unwrap());
    }

    #[test]
    fn scalar_sinusoid_locality() {
        let mut rng = Rng::from_seed(14);
        let map = ScalarSinusoid::new(&mut rng, 2048, 0.0, 1.0).unwrap();
        let eval = |v: f64| {
            let mut buf = vec![0.0f32; 2048];
            map.eval_into(v, &mut buf);
            Hypervector::from_elems(buf)
        };
        let a = eval(0.50);
        let near = eval(0.505);
        let far = eval(0.95);
        let c_near = cosine_sim(&a, &near).unwrap();
        let c_far = cosine_sim(&a, &far).unwrap();
        assert!(c_near > 0.9, "c_near {c_near}");
        assert!(c_near > c_far, "near {c_near} vs far {c_far}");
    }

    #[test]
    fn ngram_longer_than_window_rejected() {
        let enc = level_kv(15, 64, SeqMode::Ngram(10));
        assert!(enc.encode(&window(16, 5)).is_err());
    }

    #[test]
    fn construction_validation() {
        let mut rng = Rng::from_seed(17);
        let keys2 = RandomBasis::new(&mut rng, 64, 2).unwrap();
        let vals: Vec<AxisValueMap> = (0..3)
            .map(|_| {
                AxisValueMap::Level(LevelBasis::new(&mut rng, 64, 4, 0.0, 1.0).unwrap())
            })
            .collect();
        assert!(KvEncoder::new(64, keys2, vals, SeqMode::OrderPermute).is_err());
        assert!(ScalarSinusoid::new(&mut rng, 0, 0.0, 1.0).is_err());
        assert!(ScalarSinusoid::new(&mut rng, 8, 1.0, 0.0).is_err());
    }
}
