//! Flat `key = value` run configuration.
//!
//! One file drives the whole pipeline; every knob has a default matching
//! the best published configuration (ensemble generic encoder, n=6, d=10000,
//! refine rule at learning rate 3). Unknown or duplicate keys are errors —
//! a typo should fail the run, not silently fall back to a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::dataset::{SplitMode, DEFAULT_STRIDE, TAC_SHIFT_MIN, TAC_THRESHOLD};
use crate::encoding::EncoderVariant;
use crate::error::{Error, Result};
use crate::features::FeatureSpec;
use crate::model::{ModelKind, TrainConfig};

/// Which engineered features feed the density encoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatureSelection {
    /// The built-in 120-feature selection.
    Default,
    /// Every catalog feature.
    Full,
    /// A newline-separated feature-name file.
    File(PathBuf),
}

impl FeatureSelection {
    pub fn spec(&self) -> Result<FeatureSpec> {
        match self {
            FeatureSelection::Default => Ok(FeatureSpec::default_selection()),
            FeatureSelection::Full => Ok(FeatureSpec::full_catalog()),
            FeatureSelection::File(path) => FeatureSpec::from_file(path),
        }
    }

    fn as_string(&self) -> String {
        match self {
            FeatureSelection::Default => "default".into(),
            FeatureSelection::Full => "full".into(),
            FeatureSelection::File(p) => p.display().to_string(),
        }
    }
}

/// Every run parameter, resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub variant: EncoderVariant,
    pub dim: usize,
    pub ngram: usize,
    pub levels: usize,
    pub bind_time: bool,
    pub model: ModelKind,
    pub lr: f64,
    pub epochs: usize,
    pub early_stop: bool,
    pub regen_rate: f64,
    /// `None` selects the adaptive running-mean margin.
    pub margin: Option<f64>,
    /// Sign-quantize the trained memory before evaluation.
    pub quantize: bool,
    pub selection: FeatureSelection,
    pub data_dir: Option<PathBuf>,
    pub stride: usize,
    pub threshold: f64,
    pub shift_min: f64,
    /// Low-pass time constant, minutes.
    pub tau_min: f64,
    pub within_pid: bool,
    pub split: SplitMode,
    pub ratio: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            variant: EncoderVariant::EnsembleGeneric,
            dim: 10_000,
            ngram: 6,
            levels: 100,
            bind_time: false,
            model: ModelKind::Refine,
            lr: 3.0,
            epochs: 20,
            early_stop: true,
            regen_rate: 0.02,
            margin: None,
            quantize: false,
            selection: FeatureSelection::Default,
            data_dir: None,
            stride: DEFAULT_STRIDE,
            threshold: TAC_THRESHOLD,
            shift_min: TAC_SHIFT_MIN,
            tau_min: 90.0,
            within_pid: false,
            split: SplitMode::Shuffled,
            ratio: 0.7,
            seed: 42,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("{key}: '{v}' is not a boolean"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse '{v}'")))
}

impl PipelineConfig {
    /// All recognized keys, for error messages and the config echo.
    pub const KEYS: [&'static str; 22] = [
        "encoder.variant",
        "encoder.dim",
        "encoder.ngram",
        "encoder.levels",
        "encoder.bind_time",
        "model.kind",
        "model.lr",
        "model.epochs",
        "model.early_stop",
        "model.regen_rate",
        "model.margin",
        "model.quantize",
        "features.selection",
        "dataset.dir",
        "dataset.stride",
        "dataset.threshold",
        "dataset.shift_min",
        "dataset.tau_min",
        "dataset.within_pid",
        "split",
        "split.ratio",
        "seed",
    ];

    /// Applies one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "encoder.variant" => self.variant = EncoderVariant::parse(value)?,
            "encoder.dim" => self.dim = parse_num(key, value)?,
            "encoder.ngram" => self.ngram = parse_num(key, value)?,
            "encoder.levels" => self.levels = parse_num(key, value)?,
            "encoder.bind_time" => self.bind_time = parse_bool(key, value)?,
            "model.kind" => self.model = ModelKind::parse(value)?,
            "model.lr" => self.lr = parse_num(key, value)?,
            "model.epochs" => self.epochs = parse_num(key, value)?,
            "model.early_stop" => self.early_stop = parse_bool(key, value)?,
            "model.regen_rate" => self.regen_rate = parse_num(key, value)?,
            "model.margin" => {
                self.margin = match value {
                    "adaptive" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "model.quantize" => self.quantize = parse_bool(key, value)?,
            "features.selection" => {
                self.selection = match value {
                    "default" => FeatureSelection::Default,
                    "full" => FeatureSelection::Full,
                    path => FeatureSelection::File(PathBuf::from(path)),
                }
            }
            "dataset.dir" => self.data_dir = Some(PathBuf::from(value)),
            "dataset.stride" => self.stride = parse_num(key, value)?,
            "dataset.threshold" => self.threshold = parse_num(key, value)?,
            "dataset.shift_min" => self.shift_min = parse_num(key, value)?,
            "dataset.tau_min" => self.tau_min = parse_num(key, value)?,
            "dataset.within_pid" => self.within_pid = parse_bool(key, value)?,
            "split" => self.split = SplitMode::parse(value)?,
            "split.ratio" => self.ratio = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown config key '{key}' (known keys: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses a flat config file: one `key = value` per line, `#` lines are
    /// comments, keys may appear at most once.
    pub fn from_str_cfg(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    n + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if let Some(first) = seen.insert(key.to_string(), n + 1) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate key '{key}' on line {} (first set on line {first})",
                    n + 1
                )));
            }
            cfg.apply(key, value)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_str_cfg(&text)
    }

    /// The effective configuration as strings, echoed into every report.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("encoder.variant".into(), self.variant.as_str().into());
        m.insert("encoder.dim".into(), self.dim.to_string());
        m.insert("encoder.ngram".into(), self.ngram.to_string());
        m.insert("encoder.levels".into(), self.levels.to_string());
        m.insert("encoder.bind_time".into(), self.bind_time.to_string());
        m.insert("model.kind".into(), self.model.as_str().into());
        m.insert("model.lr".into(), self.lr.to_string());
        m.insert("model.epochs".into(), self.epochs.to_string());
        m.insert("model.early_stop".into(), self.early_stop.to_string());
        m.insert("model.regen_rate".into(), self.regen_rate.to_string());
        m.insert(
            "model.margin".into(),
            self.margin.map_or("adaptive".into(), |v| v.to_string()),
        );
        m.insert("model.quantize".into(), self.quantize.to_string());
        m.insert("features.selection".into(), self.selection.as_string());
        if let Some(dir) = &self.data_dir {
            m.insert("dataset.dir".into(), dir.display().to_string());
        }
        m.insert("dataset.stride".into(), self.stride.to_string());
        m.insert("dataset.threshold".into(), self.threshold.to_string());
        m.insert("dataset.shift_min".into(), self.shift_min.to_string());
        m.insert("dataset.tau_min".into(), self.tau_min.to_string());
        m.insert("dataset.within_pid".into(), self.within_pid.to_string());
        m.insert("split".into(), self.split.as_str().into());
        m.insert("split.ratio".into(), self.ratio.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }

    pub fn feature_spec(&self) -> Result<FeatureSpec> {
        self.selection.spec()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            kind: self.model,
            lr: self.lr,
            epochs: self.epochs,
            early_stop: self.early_stop,
            regen_rate: self.regen_rate,
            margin: self.margin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_paper_best() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.variant, EncoderVariant::EnsembleGeneric);
        assert_eq!(cfg.dim, 10_000);
        assert_eq!(cfg.ngram, 6);
        assert_eq!(cfg.model, ModelKind::Refine);
        assert_eq!(cfg.lr, 3.0);
        assert_eq!(cfg.threshold, 0.08);
        assert_eq!(cfg.ratio, 0.7);
        assert_eq!(cfg.split, SplitMode::Shuffled);
    }

    #[test]
    fn parses_a_full_file() {
        let text = "\
# experiment: ordered split, kv encoder
encoder.variant = ensemble-kv-rl
encoder.dim = 4096
encoder.ngram = 3
model.kind = online
model.lr = 1.5
model.margin = 0.25
split = ordered
split.ratio = 0.8
seed = 7
dataset.dir = /tmp/data
";
        let cfg = PipelineConfig::from_str_cfg(text).unwrap();
        assert_eq!(cfg.variant, EncoderVariant::EnsembleKvRandomLevel);
        assert_eq!(cfg.dim, 4096);
        assert_eq!(cfg.ngram, 3);
        assert_eq!(cfg.model, ModelKind::Online);
        assert_eq!(cfg.lr, 1.5);
        assert_eq!(cfg.margin, Some(0.25));
        assert_eq!(cfg.split, SplitMode::Chronological);
        assert_eq!(cfg.ratio, 0.8);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.data_dir.as_deref(), Some(Path::new("/tmp/data")));
        // Unset keys keep their defaults.
        assert_eq!(cfg.levels, 100);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert!(PipelineConfig::from_str_cfg("encoder.dims = 4").is_err());
        assert!(PipelineConfig::from_str_cfg("seed = 1\nseed = 2").is_err());
        assert!(PipelineConfig::from_str_cfg("just a line").is_err());
        assert!(PipelineConfig::from_str_cfg("model.lr = fast").is_err());
        assert!(PipelineConfig::from_str_cfg("encoder.bind_time = maybe").is_err());
        assert!(PipelineConfig::from_str_cfg("model.kind = svm").is_err());
    }

    #[test]
    fn margin_adaptive_round_trips() {
        let cfg = PipelineConfig::from_str_cfg("model.margin = adaptive").unwrap();
        assert_eq!(cfg.margin, None);
        assert_eq!(cfg.echo()["model.margin"], "adaptive");
        let cfg = PipelineConfig::from_str_cfg("model.margin = 0.5").unwrap();
        assert_eq!(cfg.echo()["model.margin"], "0.5");
    }

    #[test]
    fn echo_covers_every_key() {
        let mut cfg = PipelineConfig::default();
        cfg.data_dir = Some(PathBuf::from("/data"));
        let echo = cfg.echo();
        for key in PipelineConfig::KEYS {
            assert!(echo.contains_key(key), "echo missing {key}");
        }
        assert_eq!(echo.len(), PipelineConfig::KEYS.len());
    }

    #[test]
    fn echoed_config_reparses_identically() {
        let mut cfg = PipelineConfig::default();
        cfg.apply("encoder.variant", "density").unwrap();
        cfg.apply("model.lr", "2.5").unwrap();
        cfg.apply("dataset.dir", "/d").unwrap();
        let text: String =
            cfg.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let reparsed = PipelineConfig::from_str_cfg(&text).unwrap();
        assert_eq!(reparsed, cfg);
    }
}
