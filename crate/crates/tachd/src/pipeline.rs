//! End-to-end orchestration: dataset ingest, range fitting, encoder
//! construction, training, and evaluation. The CLI subcommands are thin
//! wrappers over these functions.

use std::path::Path;

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::dataset::{
    filter_tac, label_windows, load_accel, load_tac, shift_tac, split, CachedSet, IngestStats,
    LabeledSample,
};
use crate::encoding::{Encoder, EncoderConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureSpec, FeatureVector, WINDOW_LEN};
use crate::hv::Hypervector;
use crate::metrics::MetricsReport;
use crate::model::{train, AssociativeMemory, EncodingSource, TrainOutcome};

/// Name of the accelerometer CSV inside the dataset directory.
pub const ACCEL_FILE: &str = "all_accelerometer_data_pids_13.csv";
/// Name of the TAC subdirectory inside the dataset directory.
pub const TAC_DIR: &str = "clean_tac";

/// Runs the full ingest: accelerometer CSV, per-pid TAC conditioning,
/// windowing, labeling, and featurization.
pub fn ingest_dataset(dir: &Path, cfg: &PipelineConfig) -> Result<CachedSet> {
    let load = load_accel(&dir.join(ACCEL_FILE))?;
    let tac_dir = dir.join(TAC_DIR);
    let extractor = FeatureExtractor::standard();

    let mut stats = IngestStats {
        accel_rows: load.rows - load.malformed_rows,
        malformed_rows: load.malformed_rows,
        out_of_order_rows: load.out_of_order_rows,
        duplicate_times: load.duplicate_times,
        ..Default::default()
    };
    let mut samples: Vec<LabeledSample> = Vec::new();
    for stream in &load.streams {
        let tac = match load_tac(&tac_dir, &stream.pid) {
            Ok(t) => t,
            Err(_) => {
                stats.tac_files_missing += 1;
                continue;
            }
        };
        stats.participants += 1;
        stats.tac_readings += tac.len() as u64;
        if tac.len() < 3 {
            stats.short_tac_series += 1;
        }
        let conditioned = shift_tac(&filter_tac(&tac, cfg.tau_min * 60.0), cfg.shift_min);
        let (windows, dropped_gap) =
            crate::dataset::window_stream(&stream.pid, &stream.times, &stream.samples, WINDOW_LEN, cfg.stride)?;
        stats.windows_total += windows.len() as u64 + dropped_gap;
        stats.windows_dropped_gap += dropped_gap;
        let (labeled, dropped_cov) =
            label_windows(windows, &conditioned, cfg.threshold, &extractor)?;
        stats.windows_dropped_coverage += dropped_cov;
        samples.extend(labeled);
    }
    stats.samples = samples.len() as u64;
    stats.drunk_samples = samples.iter().filter(|s| s.label == 1).count() as u64;
    Ok(CachedSet { threshold: cfg.threshold, stats, samples })
}

/// Nearest-rank percentile span over the values, e.g. `(0.5, 99.5)` for the
/// robust range the encoders quantize against. Degenerate spans (constant
/// input) widen by 0.5 on each side so quantization stays well-defined.
pub fn percentile_range(values: &mut [f64], lo_pct: f64, hi_pct: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("percentile of an empty set".into()));
    }
    if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) || lo_pct > hi_pct {
        return Err(Error::InvalidConfig(format!(
            "percentile bounds {lo_pct}..{hi_pct} invalid"
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidValue(format!("non-finite value {bad} in range fit")));
    }
    let n = values.len();
    let rank = |pct: f64| ((pct / 100.0 * n as f64).ceil() as usize).clamp(1, n) - 1;
    let (lo_i, hi_i) = (rank(lo_pct), rank(hi_pct));
    let (_, lo, _) = values.select_nth_unstable_by(lo_i, f64::total_cmp);
    let lo = *lo;
    let (_, hi, _) = values.select_nth_unstable_by(hi_i, f64::total_cmp);
    let hi = *hi;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Ok((lo - 0.5, hi + 0.5))
    }
}

/// Builds an encoder whose quantization ranges are fitted on the training
/// split (0.5th–99.5th percentile per axis and per selected feature).
pub fn fit_encoder(
    cfg: &PipelineConfig,
    spec: &FeatureSpec,
    train_set: &[LabeledSample],
) -> Result<Encoder> {
    if train_set.is_empty() {
        return Err(Error::EmptyInput("fitting an encoder on an empty split".into()));
    }
    let mut enc_cfg = EncoderConfig {
        variant: cfg.variant,
        dim: cfg.dim,
        ngram: cfg.ngram,
        levels: cfg.levels,
        seed: cfg.seed,
        window_len: WINDOW_LEN,
        bind_start_time: cfg.bind_time,
        ..EncoderConfig::default()
    };
    if cfg.variant.needs_axis_ranges() {
        for axis in 0..3 {
            let mut vals: Vec<f64> = train_set
                .iter()
                .flat_map(|s| s.window.samples().iter().map(move |r| r[axis] as f64))
                .collect();
            enc_cfg.axis_ranges[axis] = percentile_range(&mut vals, 0.5, 99.5)?;
        }
    }
    if cfg.variant.uses_features() {
        enc_cfg.feature_ranges = spec
            .indices()
            .iter()
            .map(|&fi| {
                let mut vals: Vec<f64> =
                    train_set.iter().map(|s| s.features.values()[fi]).collect();
                percentile_range(&mut vals, 0.5, 99.5)
            })
            .collect::<Result<_>>()?;
    }
    if cfg.bind_time {
        let lo = train_set.iter().map(|s| s.window_start()).min().unwrap() as f64;
        let hi = train_set.iter().map(|s| s.window_start()).max().unwrap() as f64;
        enc_cfg.time_range = if lo < hi { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    }
    Encoder::new(enc_cfg)
}

/// Projects each sample's full feature catalog down to the configured
/// selection.
pub fn select_features(
    samples: &[LabeledSample],
    spec: &FeatureSpec,
) -> Result<Vec<FeatureVector>> {
    samples
        .iter()
        .map(|s| {
            let all = s.features.values();
            if spec.indices().iter().any(|&i| i >= all.len()) {
                return Err(Error::DimMismatch {
                    left: spec.indices().iter().copied().max().unwrap_or(0),
                    right: all.len(),
                });
            }
            FeatureVector::new(spec.indices().iter().map(|&i| all[i]).collect())
        })
        .collect()
}

/// Labeled windows plus their selected features, exposed as a regenerable
/// [`EncodingSource`] for the training loop.
pub struct SampleCorpus<'a> {
    encoder: &'a mut Encoder,
    samples: &'a [LabeledSample],
    selected: Vec<FeatureVector>,
}

impl<'a> SampleCorpus<'a> {
    pub fn new(
        encoder: &'a mut Encoder,
        samples: &'a [LabeledSample],
        spec: &FeatureSpec,
    ) -> Result<Self> {
        let selected = select_features(samples, spec)?;
        Ok(SampleCorpus { encoder, samples, selected })
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }
}

impl EncodingSource for SampleCorpus<'_> {
    fn len(&self) -> usize {
        self.samples.len()
    }
    fn dim(&self) -> usize {
        self.encoder.dim()
    }
    fn encode(&self, i: usize) -> Result<Hypervector> {
        self.encoder.encode(&self.samples[i].window, &self.selected[i])
    }
    fn supports_regeneration(&self) -> bool {
        true
    }
    fn regenerate_dims(&mut self, dims: &[usize]) -> Result<()> {
        self.encoder.regenerate_dims(dims)
    }
}

/// Encodes every sample with a fixed encoder (windows in parallel).
pub fn encode_set(
    encoder: &Encoder,
    samples: &[LabeledSample],
    spec: &FeatureSpec,
) -> Result<Vec<Hypervector>> {
    let selected = select_features(samples, spec)?;
    samples
        .par_iter()
        .zip(selected.par_iter())
        .map(|(s, f)| encoder.encode(&s.window, f))
        .collect()
}

/// Per-sample predictions and decision scores on an evaluation set.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub labels: Vec<u8>,
    pub preds: Vec<u8>,
    /// Drunk-minus-sober cosine margin, the ROC score.
    pub scores: Vec<f64>,
}

impl Evaluation {
    pub fn accuracy(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        let ok = self.labels.iter().zip(&self.preds).filter(|(y, p)| y == p).count();
        ok as f64 / self.labels.len() as f64
    }
}

/// Encodes and classifies every sample against a trained memory.
pub fn evaluate(
    memory: &AssociativeMemory,
    encoder: &Encoder,
    samples: &[LabeledSample],
    spec: &FeatureSpec,
) -> Result<Evaluation> {
    let selected = select_features(samples, spec)?;
    let results: Vec<(u8, f64)> = samples
        .par_iter()
        .zip(selected.par_iter())
        .map(|(s, f)| {
            let h = encoder.encode(&s.window, f)?;
            let (pred, sims) = memory.classify_lenient(&h);
            Ok((pred as u8, sims[1] as f64 - sims[0] as f64))
        })
        .collect::<Result<_>>()?;
    Ok(Evaluation {
        labels: samples.iter().map(|s| s.label).collect(),
        preds: results.iter().map(|r| r.0).collect(),
        scores: results.iter().map(|r| r.1).collect(),
    })
}

/// Scores pre-encoded windows against a trained memory. Useful when many
/// models share one fixed encoding of the same split.
pub fn evaluate_encoded(
    memory: &AssociativeMemory,
    encodings: &[Hypervector],
    labels: &[u8],
) -> Result<Evaluation> {
    if encodings.len() != labels.len() {
        return Err(Error::DimMismatch { left: encodings.len(), right: labels.len() });
    }
    if encodings.is_empty() {
        return Err(Error::EmptyInput("evaluating an empty encoded set".into()));
    }
    let results: Vec<(u8, f64)> = encodings
        .par_iter()
        .map(|h| {
            let (pred, sims) = memory.classify_lenient(h);
            (pred as u8, sims[1] as f64 - sims[0] as f64)
        })
        .collect();
    Ok(Evaluation {
        labels: labels.to_vec(),
        preds: results.iter().map(|r| r.0).collect(),
        scores: results.iter().map(|r| r.1).collect(),
    })
}

/// Everything a train/eval run produces.
pub struct ExperimentResult {
    pub report: MetricsReport,
    pub outcome: TrainOutcome,
    pub memory: AssociativeMemory,
    pub encoder: Encoder,
    pub train_len: usize,
    pub test_len: usize,
}

/// Splits, fits, trains, and evaluates one configuration over an ingested
/// sample set.
pub fn run_experiment(
    cfg: &PipelineConfig,
    samples: Vec<LabeledSample>,
) -> Result<ExperimentResult> {
    let spec = cfg.feature_spec()?;
    let (train_set, test_set) =
        split(samples, cfg.split, cfg.ratio, cfg.seed, cfg.within_pid)?;
    if test_set.is_empty() {
        return Err(Error::EmptyInput("split produced an empty test set".into()));
    }
    let mut encoder = fit_encoder(cfg, &spec, &train_set)?;
    let outcome = {
        let mut corpus = SampleCorpus::new(&mut encoder, &train_set, &spec)?;
        let labels = corpus.labels();
        train(&cfg.train_config(), &mut corpus, &labels)?
    };
    let memory =
        if cfg.quantize { outcome.memory.quantized() } else { outcome.memory.clone() };
    let eval = evaluate(&memory, &encoder, &test_set, &spec)?;
    let report = MetricsReport::from_predictions(
        &eval.labels,
        &eval.preds,
        &eval.scores,
        cfg.echo(),
        cfg.seed,
    )?;
    Ok(ExperimentResult {
        report,
        outcome,
        memory,
        encoder,
        train_len: train_set.len(),
        test_len: test_set.len(),
    })
}
