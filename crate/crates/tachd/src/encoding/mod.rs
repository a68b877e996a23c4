//! Window encoders.
//!
//! An [`Encoder`] maps a raw accelerometer window and/or its feature vector
//! into the hyperspace. Raw-signal variants read the samples directly; the
//! density variant reads engineered features; ensemble variants fuse one of
//! each by bundling the two sign-quantized encodings with their bound
//! product, so the fused vector stays similar to both parts while the
//! product term marks their co-occurrence.

pub mod density;
pub mod kv;
pub mod ngram;
pub mod sinusoid;

pub use density::DensityEncoder;
pub use kv::{AxisValueMap, KvEncoder, ScalarSinusoid, SeqMode};
pub use ngram::encode_ngram;
pub use sinusoid::SinusoidProjection;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, RawWindow};
use crate::hv::{bind, sign_quantize, Hypervector, LevelBasis, RandomBasis};
use crate::rng::Rng;

/// Encoder family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EncoderVariant {
    /// Key-value over raw samples with level value maps, order by permutation.
    KvRandomLevel,
    /// Key-value over raw samples with sinusoid value maps, order by permutation.
    KvSinusoid,
    /// Whole-window sinusoid projection.
    SinusoidProj,
    /// Key-value symbols composed as n-grams.
    Generic,
    /// Feature-vector density encoder.
    Density,
    /// [`EncoderVariant::Generic`] fused with the density encoder.
    EnsembleGeneric,
    /// [`EncoderVariant::KvRandomLevel`] fused with the density encoder.
    EnsembleKvRandomLevel,
    /// [`EncoderVariant::KvSinusoid`] fused with the density encoder.
    EnsembleKvSinusoid,
    /// [`EncoderVariant::SinusoidProj`] fused with the density encoder.
    EnsembleSinusoid,
}

impl EncoderVariant {
    pub const ALL: [EncoderVariant; 9] = [
        EncoderVariant::KvRandomLevel,
        EncoderVariant::KvSinusoid,
        EncoderVariant::SinusoidProj,
        EncoderVariant::Generic,
        EncoderVariant::Density,
        EncoderVariant::EnsembleGeneric,
        EncoderVariant::EnsembleKvRandomLevel,
        EncoderVariant::EnsembleKvSinusoid,
        EncoderVariant::EnsembleSinusoid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EncoderVariant::KvRandomLevel => "kv-rl",
            EncoderVariant::KvSinusoid => "kv-sn",
            EncoderVariant::SinusoidProj => "sinusoid",
            EncoderVariant::Generic => "generic",
            EncoderVariant::Density => "density",
            EncoderVariant::EnsembleGeneric => "ensemble-generic",
            EncoderVariant::EnsembleKvRandomLevel => "ensemble-kv-rl",
            EncoderVariant::EnsembleKvSinusoid => "ensemble-kv-sn",
            EncoderVariant::EnsembleSinusoid => "ensemble-sinusoid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|v| v.as_str()).collect();
                Error::InvalidConfig(format!(
                    "unknown encoder variant '{s}' (expected one of: {})",
                    names.join(", ")
                ))
            })
    }

    /// The raw-signal half of this variant, if any.
    fn raw_part(&self) -> Option<EncoderVariant> {
        match self {
            EncoderVariant::Density => None,
            EncoderVariant::EnsembleGeneric => Some(EncoderVariant::Generic),
            EncoderVariant::EnsembleKvRandomLevel => Some(EncoderVariant::KvRandomLevel),
            EncoderVariant::EnsembleKvSinusoid => Some(EncoderVariant::KvSinusoid),
            EncoderVariant::EnsembleSinusoid => Some(EncoderVariant::SinusoidProj),
            v => Some(*v),
        }
    }

    /// True when the variant reads the raw sample window.
    pub fn uses_raw(&self) -> bool {
        self.raw_part().is_some()
    }

    /// True when the variant quantizes raw values against fitted axis
    /// ranges (the sinusoid projection consumes raw values unscaled).
    pub fn needs_axis_ranges(&self) -> bool {
        matches!(
            self.raw_part(),
            Some(EncoderVariant::Generic)
                | Some(EncoderVariant::KvRandomLevel)
                | Some(EncoderVariant::KvSinusoid)
        )
    }

    /// True when the variant reads the engineered feature vector.
    pub fn uses_features(&self) -> bool {
        matches!(
            self,
            EncoderVariant::Density
                | EncoderVariant::EnsembleGeneric
                | EncoderVariant::EnsembleKvRandomLevel
                | EncoderVariant::EnsembleKvSinusoid
                | EncoderVariant::EnsembleSinusoid
        )
    }
}

impl std::fmt::Display for EncoderVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full encoder configuration.
///
/// The ranges are normally fitted on the training split (robust percentiles)
/// and describe, per raw axis and per selected feature, the value span each
/// level basis covers.
#[derive(Clone, Debug)]
pub struct EncoderConfig {
    pub variant: EncoderVariant,
    /// Hyperspace dimensionality.
    pub dim: usize,
    /// N-gram size for the generic variants.
    pub ngram: usize,
    /// Quantization levels for level and density structures.
    pub levels: usize,
    /// Seed for all basis draws.
    pub seed: u64,
    /// Samples per window this encoder accepts.
    pub window_len: usize,
    /// Fitted `[lo, hi]` per raw axis.
    pub axis_ranges: [(f64, f64); 3],
    /// Fitted `[lo, hi]` per selected feature; length defines the feature
    /// count for feature-using variants.
    pub feature_ranges: Vec<(f64, f64)>,
    /// When set, the final encoding is bound with a level vector of the
    /// window start time (an ablation of positional context).
    pub bind_start_time: bool,
    /// Start-time range (ms) for the time level basis.
    pub time_range: (f64, f64),
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            variant: EncoderVariant::EnsembleGeneric,
            dim: 10_000,
            ngram: 6,
            levels: 100,
            seed: 42,
            window_len: crate::features::WINDOW_LEN,
            axis_ranges: [(-3.0, 3.0); 3],
            feature_ranges: Vec::new(),
            bind_start_time: false,
            time_range: (0.0, 1.0),
        }
    }
}

impl EncoderConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidDimension("encoder dimension must be positive".into()));
        }
        if self.window_len == 0 {
            return Err(Error::InvalidConfig("window length must be positive".into()));
        }
        if self.levels < 2 {
            return Err(Error::InvalidConfig(format!("levels must be >= 2, got {}", self.levels)));
        }
        let raw = self.variant.raw_part();
        if matches!(raw, Some(EncoderVariant::Generic))
            && (self.ngram == 0 || self.ngram > self.window_len)
        {
            return Err(Error::InvalidConfig(format!(
                "n-gram size {} outside 1..={} (window length)",
                self.ngram, self.window_len
            )));
        }
        if matches!(
            raw,
            Some(EncoderVariant::Generic)
                | Some(EncoderVariant::KvRandomLevel)
                | Some(EncoderVariant::KvSinusoid)
        ) {
            for (lo, hi) in self.axis_ranges {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidConfig(format!("axis range [{lo}, {hi}] invalid")));
                }
            }
        }
        if self.variant.uses_features() && self.feature_ranges.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "variant {} needs feature ranges",
                self.variant
            )));
        }
        if self.bind_start_time {
            let (lo, hi) = self.time_range;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!("time range [{lo}, {hi}] invalid")));
            }
        }
        Ok(())
    }
}

enum RawEncoder {
    Kv(KvEncoder),
    Sinusoid(SinusoidProjection),
}

/// A fully initialized window encoder.
pub struct Encoder {
    cfg: EncoderConfig,
    raw: Option<RawEncoder>,
    density: Option<DensityEncoder>,
    time_basis: Option<LevelBasis>,
    regen_rng: Rng,
}

impl Encoder {
    /// Builds all basis structures for the configured variant. Every random
    /// draw comes from a sub-stream derived from `cfg.seed`, so encoders
    /// with equal configs are bitwise identical.
    pub fn new(cfg: EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        let root = Rng::from_seed(cfg.seed);
        let raw = match cfg.variant.raw_part() {
            None => None,
            Some(EncoderVariant::SinusoidProj) => Some(RawEncoder::Sinusoid(SinusoidProjection::new(
                &mut root.derive("sinusoid.w"),
                &mut root.derive("sinusoid.b"),
                cfg.dim,
                cfg.window_len * 3,
            )?)),
            Some(part) => {
                let keys = RandomBasis::new(&mut root.derive("kv.keys"), cfg.dim, 3)?;
                let sn_values = matches!(part, EncoderVariant::KvSinusoid);
                let values = ["x", "y", "z"]
                    .iter()
                    .enumerate()
                    .map(|(a, name)| {
                        let (lo, hi) = cfg.axis_ranges[a];
                        if sn_values {
                            Ok(AxisValueMap::Sinusoid(ScalarSinusoid::new(
                                &mut root.derive(&format!("kv.sn.{name}")),
                                cfg.dim,
                                lo,
                                hi,
                            )?))
                        } else {
                            Ok(AxisValueMap::Level(LevelBasis::new(
                                &mut root.derive(&format!("kv.level.{name}")),
                                cfg.dim,
                                cfg.levels,
                                lo,
                                hi,
                            )?))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mode = if matches!(part, EncoderVariant::Generic) {
                    SeqMode::Ngram(cfg.ngram)
                } else {
                    SeqMode::OrderPermute
                };
                Some(RawEncoder::Kv(KvEncoder::new(cfg.dim, keys, values, mode)?))
            }
        };
        let density = if cfg.variant.uses_features() {
            Some(DensityEncoder::new(
                &mut root.derive("density"),
                cfg.dim,
                cfg.levels,
                &cfg.feature_ranges,
            )?)
        } else {
            None
        };
        let time_basis = if cfg.bind_start_time {
            Some(LevelBasis::new(
                &mut root.derive("time"),
                cfg.dim,
                cfg.levels,
                cfg.time_range.0,
                cfg.time_range.1,
            )?)
        } else {
            None
        };
        let regen_rng = root.derive("regen");
        Ok(Encoder { cfg, raw, density, time_basis, regen_rng })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim
    }

    pub fn variant(&self) -> EncoderVariant {
        self.cfg.variant
    }

    /// Encodes from whichever parts the variant needs; pass `None` for a
    /// part only if the variant does not read it.
    pub fn encode_parts(
        &self,
        window: Option<&RawWindow>,
        features: Option<&FeatureVector>,
    ) -> Result<Hypervector> {
        let raw_out = match &self.raw {
            None => None,
            Some(enc) => {
                let w = window.ok_or_else(|| {
                    Error::InvalidValue(format!("variant {} needs a raw window", self.cfg.variant))
                })?;
                if w.len() != self.cfg.window_len {
                    return Err(Error::DimMismatch { left: w.len(), right: self.cfg.window_len });
                }
                Some(match enc {
                    RawEncoder::Kv(kv) => kv.encode(w)?,
                    RawEncoder::Sinusoid(p) => p.encode(w)?,
                })
            }
        };
        let density_out = match &self.density {
            None => None,
            Some(enc) => {
                let f = features.ok_or_else(|| {
                    Error::InvalidValue(format!("variant {} needs features", self.cfg.variant))
                })?;
                Some(enc.encode(f)?)
            }
        };
        let mut h = match (raw_out, density_out) {
            (Some(r), None) => r,
            (None, Some(d)) => d,
            (Some(r), Some(d)) => {
                let h1 = sign_quantize(&r);
                let h2 = sign_quantize(&d);
                let prod = bind(&h1, &h2)?;
                let mut out = h1;
                out.scaled_add(&h2, 1.0);
                out.scaled_add(&prod, 1.0);
                out
            }
            (None, None) => unreachable!("validated variant always has at least one part"),
        };
        if let Some(tb) = &self.time_basis {
            let w = window.ok_or_else(|| {
                Error::InvalidValue("start-time binding needs a raw window".into())
            })?;
            h = bind(&h, tb.quantize(w.start_time() as f64)?)?;
        }
        Ok(h)
    }

    /// Encodes a window given both raw samples and features.
    pub fn encode(&self, window: &RawWindow, features: &FeatureVector) -> Result<Hypervector> {
        self.encode_parts(Some(window), Some(features))
    }

    /// Re-draws the encoder's basis state at the given output dimensions
    /// (for the sinusoid projection this re-samples whole rows). Draws come
    /// from the encoder's dedicated regeneration stream, so a sequence of
    /// regenerations is as deterministic as the initial construction.
    pub fn regenerate_dims(&mut self, dims: &[usize]) -> Result<()> {
        if let Some(&bad) = dims.iter().find(|&&j| j >= self.cfg.dim) {
            return Err(Error::InvalidDimension(format!(
                "regeneration dim {bad} out of range {}",
                self.cfg.dim
            )));
        }
        let mut sorted = dims.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        match &mut self.raw {
            Some(RawEncoder::Kv(kv)) => kv.regenerate_dims(&sorted, &mut self.regen_rng),
            Some(RawEncoder::Sinusoid(p)) => p.regenerate_dims(&sorted, &mut self.regen_rng),
            None => {}
        }
        if let Some(d) = &mut self.density {
            d.regenerate_dims(&sorted, &mut self.regen_rng);
        }
        if let Some(t) = &mut self.time_basis {
            t.regenerate_dims(&sorted, &mut self.regen_rng);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::cosine_sim;

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
        RawWindow::with_nominal_times("T", 1_000_000, samples).unwrap()
    }

    fn features(seed: u64, n: usize) -> FeatureVector {
        let mut rng = Rng::from_seed(seed);
        FeatureVector::new((0..n).map(|_| rng.uniform(0.0, 1.0)).collect()).unwrap()
    }

    fn cfg(variant: EncoderVariant, dim: usize, window_len: usize, n_feats: usize) -> EncoderConfig {
        EncoderConfig {
            variant,
            dim,
            ngram: 3,
            levels: 10,
            seed: 77,
            window_len,
            axis_ranges: [(-2.0, 2.0); 3],
            feature_ranges: vec![(0.0, 1.0); n_feats],
            ..EncoderConfig::default()
        }
    }

    #[test]
    fn every_variant_encodes() {
        let w = window(1, 20);
        let f = features(2, 8);
        for variant in EncoderVariant::ALL {
            let enc = Encoder::new(cfg(variant, 512, 20, 8)).unwrap();
            let h = enc.encode(&w, &f).unwrap();
            assert_eq!(h.dim(), 512);
            assert!(h.norm() > 0.0, "{variant} produced a zero vector");
            // Deterministic rebuild.
            let enc2 = Encoder::new(cfg(variant, 512, 20, 8)).unwrap();
            assert_eq!(h, enc2.encode(&w, &f).unwrap(), "{variant} not deterministic");
        }
    }

    #[test]
    fn ensemble_elements_come_from_the_fusion_lattice() {
        // sign(H1) + sign(H2) + sign(H1)*sign(H2) takes value 3 where the
        // parts agree positively and -1 everywhere else.
        let enc = Encoder::new(cfg(EncoderVariant::EnsembleGeneric, 256, 20, 8)).unwrap();
        let h = enc.encode(&window(3, 20), &features(4, 8)).unwrap();
        for &v in h.as_slice() {
            assert!(v == 3.0 || v == -1.0, "unexpected ensemble element {v}");
        }
    }

    #[test]
    fn ensemble_resembles_both_parts() {
        let n_feats = 8;
        let shared = cfg(EncoderVariant::EnsembleGeneric, 8192, 20, n_feats);
        let ens = Encoder::new(shared.clone()).unwrap();
        let raw_only = Encoder::new(EncoderConfig {
            variant: EncoderVariant::Generic,
            ..shared.clone()
        })
        .unwrap();
        let feat_only = Encoder::new(EncoderConfig {
            variant: EncoderVariant::Density,
            ..shared
        })
        .unwrap();
        let w = window(5, 20);
        let f = features(6, n_feats);
        let he = ens.encode(&w, &f).unwrap();
        let hr = raw_only.encode_parts(Some(&w), None).unwrap();
        let hd = feat_only.encode_parts(None, Some(&f)).unwrap();
        let cr = cosine_sim(&he, &crate::hv::sign_quantize(&hr)).unwrap();
        let cd = cosine_sim(&he, &crate::hv::sign_quantize(&hd)).unwrap();
        assert!(cr > 0.3, "ensemble vs raw part {cr}");
        assert!(cd > 0.3, "ensemble vs density part {cd}");
    }

    #[test]
    fn missing_parts_are_rejected() {
        let enc = Encoder::new(cfg(EncoderVariant::EnsembleGeneric, 128, 10, 4)).unwrap();
        let w = window(7, 10);
        let f = features(8, 4);
        assert!(enc.encode_parts(Some(&w), None).is_err());
        assert!(enc.encode_parts(None, Some(&f)).is_err());
        // Wrong feature count.
        assert!(enc.encode(&w, &features(9, 5)).is_err());
        // Wrong window length.
        assert!(enc.encode(&window(10, 11), &f).is_err());
    }

    #[test]
    fn start_time_binding_changes_encoding_reversibly() {
        let mut c = cfg(EncoderVariant::Generic, 1024, 10, 0);
        c.feature_ranges.clear();
        let plain = Encoder::new(c.clone()).unwrap();
        c.bind_start_time = true;
        c.time_range = (0.0, 10_000_000.0);
        let bound = Encoder::new(c).unwrap();
        let w = window(11, 10);
        let hp = plain.encode_parts(Some(&w), None).unwrap();
        let hb = bound.encode_parts(Some(&w), None).unwrap();
        assert_ne!(hp, hb);
        // Binding is an involution: rebinding with the same time vector
        // recovers the raw encoding.
        let root = Rng::from_seed(77);
        let tb = LevelBasis::new(&mut root.derive("time"), 1024, 10, 0.0, 10_000_000.0).unwrap();
        let undone = bind(&hb, tb.quantize(w.start_time() as f64).unwrap()).unwrap();
        assert_eq!(undone, hp);
    }

    #[test]
    fn variant_parsing_round_trips() {
        for v in EncoderVariant::ALL {
            assert_eq!(EncoderVariant::parse(v.as_str()).unwrap(), v);
        }
        assert!(EncoderVariant::parse("bogus").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(Encoder::new(cfg(EncoderVariant::Generic, 0, 10, 0)).is_err());
        let mut c = cfg(EncoderVariant::Generic, 64, 10, 0);
        c.ngram = 11;
        assert!(Encoder::new(c).is_err());
        let mut c = cfg(EncoderVariant::Density, 64, 10, 4);
        c.feature_ranges.clear();
        assert!(Encoder::new(c).is_err());
        let mut c = cfg(EncoderVariant::KvRandomLevel, 64, 10, 0);
        c.axis_ranges[1] = (2.0, -2.0);
        assert!(Encoder::new(c).is_err());
        let mut c = cfg(EncoderVariant::Generic, 64, 10, 0);
        c.levels = 1;
        assert!(Encoder::new(c).is_err());
    }

    #[test]
    fn regeneration_is_deterministic_and_validated() {
        let make = || Encoder::new(cfg(EncoderVariant::EnsembleSinusoid, 256, 10, 4)).unwrap();
        let w = window(12, 10);
        let f = features(13, 4);
        let mut a = make();
        let mut b = make();
        a.regenerate_dims(&[1, 5, 9]).unwrap();
        b.regenerate_dims(&[9, 5, 1, 5]).unwrap(); // order/dupes must not matter
        assert_eq!(a.encode(&w, &f).unwrap(), b.encode(&w, &f).unwrap());
        assert!(a.regenerate_dims(&[256]).is_err());
    }
}
