//! Training rules for the associative memory.
//!
//! All six models share one loop: walk the training samples in order, keep
//! per-epoch decision-time accuracy, and stop early once accuracy plateaus.
//! They differ in the per-sample update and in whether they regenerate weak
//! encoder dimensions between epochs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hv::Hypervector;
use crate::model::AssociativeMemory;

/// Learning rule selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Single additive pass: `acc[y] += h`.
    Vanilla,
    /// Mistake-driven: on a miss, `acc[y] += lr*h`, `acc[pred] -= lr*h`.
    Adapt,
    /// Similarity-weighted: always reinforces the true class by
    /// `lr * (1 - sim)`, and on a miss pushes the predicted class away by
    /// its own weighted step.
    Online,
    /// The online rule plus a margin pass: correct predictions whose
    /// top-two similarity gap falls below an adaptive margin (the running
    /// mean of observed gaps) are reinforced as if they had been missed.
    Refine,
    /// Adaptive updates plus per-epoch regeneration of the dimensions that
    /// least separate the normalized class vectors.
    NeuralHd,
    /// Adaptive updates plus per-epoch regeneration of the dimensions that
    /// most mislead near-miss samples toward the wrong class.
    DistHd,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Vanilla,
        ModelKind::Adapt,
        ModelKind::Online,
        ModelKind::Refine,
        ModelKind::NeuralHd,
        ModelKind::DistHd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Vanilla => "vanilla",
            ModelKind::Adapt => "adapt",
            ModelKind::Online => "online",
            ModelKind::Refine => "refine",
            ModelKind::NeuralHd => "neural",
            ModelKind::DistHd => "dist",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(ModelKind::Vanilla),
            "adapt" => Ok(ModelKind::Adapt),
            "online" => Ok(ModelKind::Online),
            "refine" => Ok(ModelKind::Refine),
            "neural" | "neuralhd" => Ok(ModelKind::NeuralHd),
            "dist" | "disthd" => Ok(ModelKind::DistHd),
            _ => Err(Error::InvalidConfig(format!(
                "unknown model kind '{s}' (expected one of: vanilla, adapt, online, refine, neural, dist)"
            ))),
        }
    }

    /// True for models that re-draw encoder dimensions between epochs.
    pub fn regenerates(&self) -> bool {
        matches!(self, ModelKind::NeuralHd | ModelKind::DistHd)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training hyperparameters.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub kind: ModelKind,
    /// Learning rate (alpha).
    pub lr: f64,
    /// Epoch budget; training may stop earlier on plateau.
    pub epochs: usize,
    /// Stop when decision-time accuracy improves by less than 0.1 % over
    /// three epochs.
    pub early_stop: bool,
    /// Fraction of dimensions regenerated per epoch by the regenerative
    /// models.
    pub regen_rate: f64,
    /// Fixed margin for the refine rule; `None` selects the adaptive
    /// running-mean margin.
    pub margin: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            kind: ModelKind::Refine,
            lr: 3.0,
            epochs: 20,
            early_stop: true,
            regen_rate: 0.02,
            margin: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::InvalidConfig(format!("learning rate {} must be positive", self.lr)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epoch budget must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.regen_rate) {
            return Err(Error::InvalidConfig(format!(
                "regeneration rate {} outside [0, 1]",
                self.regen_rate
            )));
        }
        if let Some(m) = self.margin {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidConfig(format!("margin {m} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Where training samples come from. Implementations must encode a sample
/// index deterministically; regenerative models additionally re-draw basis
/// dimensions between epochs and then re-encode every sample.
pub trait EncodingSource: Sync {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn dim(&self) -> usize;
    fn encode(&self, i: usize) -> Result<Hypervector>;
    fn supports_regeneration(&self) -> bool {
        false
    }
    fn regenerate_dims(&mut self, _dims: &[usize]) -> Result<()> {
        Err(Error::UnsupportedEncoder(
            "this encoding source cannot regenerate dimensions".into(),
        ))
    }
}

/// A source over pre-encoded hypervectors, for models without regeneration.
pub struct FixedEncodings {
    encodings: Vec<Hypervector>,
    dim: usize,
}

impl FixedEncodings {
    pub fn new(encodings: Vec<Hypervector>) -> Result<Self> {
        let dim = encodings
            .first()
            .ok_or_else(|| Error::EmptyInput("no training encodings".into()))?
            .dim();
        if let Some(bad) = encodings.iter().find(|h| h.dim() != dim) {
            return Err(Error::DimMismatch { left: dim, right: bad.dim() });
        }
        Ok(FixedEncodings { encodings, dim })
    }
}

impl EncodingSource for FixedEncodings {
    fn len(&self) -> usize {
        self.encodings.len()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn encode(&self, i: usize) -> Result<Hypervector> {
        Ok(self.encodings[i].clone())
    }
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub memory: AssociativeMemory,
    /// Epochs actually executed.
    pub epochs_run: usize,
    /// Decision-time training accuracy per epoch (for the vanilla rule, a
    /// single post-pass evaluation).
    pub epoch_accuracy: Vec<f64>,
    /// Total dimensions regenerated across the run.
    pub regenerated_dims: usize,
}

fn encode_all(source: &dyn EncodingSource) -> Result<Vec<Hypervector>> {
    (0..source.len()).into_par_iter().map(|i| source.encode(i)).collect()
}

fn clamp01(x: f32) -> f64 {
    (x as f64).clamp(0.0, 1.0)
}

/// Indices of the two highest similarities (best first; ties to lower index).
fn top_two(sims: &[f32]) -> (usize, usize) {
    let mut best = 0;
    for (c, &s) in sims.iter().enumerate().skip(1) {
        if s > sims[best] {
            best = c;
        }
    }
    let mut second = usize::MAX;
    for (c, &s) in sims.iter().enumerate() {
        if c == best {
            continue;
        }
        if second == usize::MAX || s > sims[second] {
            second = c;
        }
    }
    (best, second)
}

/// Running-mean margin state for the refine rule. Before any observation the
/// margin is infinite, so every correct prediction reinforces.
struct AdaptiveMargin {
    fixed: Option<f64>,
    mean: f64,
    count: u64,
}

impl AdaptiveMargin {
    fn new(fixed: Option<f64>) -> Self {
        AdaptiveMargin { fixed, mean: 0.0, count: 0 }
    }
    fn current(&self) -> f64 {
        match self.fixed {
            Some(m) => m,
            None if self.count == 0 => f64::INFINITY,
            None => self.mean,
        }
    }
    fn observe(&mut self, gap: f64) {
        self.count += 1;
        self.mean += (gap - self.mean) / self.count as f64;
    }
}

/// Scores every dimension for regeneration.
///
/// * `NeuralHd`: the spread of that dimension across L2-normalized class
///   vectors — regenerate the `k` *smallest* (least discriminative).
/// * `DistHd`: the mislead mass accumulated over the epoch's top-two misses
///   — regenerate the `k` *largest*. Ties resolve to the lowest index.
fn select_dims(scores: &[f64], k: usize, take_lowest: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = scores[a].total_cmp(&scores[b]);
        let cmp = if take_lowest { cmp } else { cmp.reverse() };
        cmp.then(a.cmp(&b))
    });
    let mut dims: Vec<usize> = order.into_iter().take(k).collect();
    dims.sort_unstable();
    dims
}

fn neural_scores(mem: &AssociativeMemory) -> Vec<f64> {
    let dim = mem.dim();
    let normalized: Vec<Option<Vec<f64>>> = (0..mem.n_classes())
        .map(|c| {
            let acc = mem.class_vector(c);
            let n = acc.norm();
            if n == 0.0 {
                None
            } else {
                Some(acc.as_slice().iter().map(|&v| v as f64 / n).collect())
            }
        })
        .collect();
    (0..dim)
        .map(|j| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for nc in &normalized {
                let v = nc.as_ref().map_or(0.0, |n| n[j]);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            hi - lo
        })
        .collect()
}

/// Trains a memory from an encoding source and labels.
///
/// Labels select classes `0..n_classes`; the class count is inferred from
/// the highest label (at least two). Sample order is preserved — runs are
/// bit-reproducible for a fixed source and config.
pub fn train(
    cfg: &TrainConfig,
    source: &mut dyn EncodingSource,
    labels: &[u8],
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if source.is_empty() {
        return Err(Error::EmptyInput("training on an empty sample set".into()));
    }
    if labels.len() != source.len() {
        return Err(Error::DimMismatch { left: labels.len(), right: source.len() });
    }
    if cfg.kind.regenerates() && !source.supports_regeneration() {
        return Err(Error::UnsupportedEncoder(format!(
            "model '{}' regenerates encoder dimensions, which this encoding source does not support",
            cfg.kind
        )));
    }
    let dim = source.dim();
    let n_classes = (labels.iter().copied().max().unwrap() as usize + 1).max(2);
    let lr = cfg.lr as f32;

    let mut encodings = encode_all(source)?;
    let mut mem = AssociativeMemory::new(dim, n_classes)?;

    if cfg.kind == ModelKind::Vanilla {
        for (h, &y) in encodings.iter().zip(labels) {
            mem.add(y as usize, h, 1.0)?;
        }
        let correct = encodings
            .iter()
            .zip(labels)
            .filter(|(h, &y)| mem.classify_lenient(h).0 == y as usize)
            .count();
        let acc = correct as f64 / labels.len() as f64;
        return Ok(TrainOutcome {
            memory: mem,
            epochs_run: 1,
            epoch_accuracy: vec![acc],
            regenerated_dims: 0,
        });
    }

    let mut margin = AdaptiveMargin::new(cfg.margin);
    let mut epoch_accuracy: Vec<f64> = Vec::new();
    let mut regenerated_total = 0usize;
    let regen_per_epoch = (cfg.regen_rate * dim as f64).floor() as usize;

    let mut epochs_run = 0;
    for epoch in 1..=cfg.epochs {
        epochs_run = epoch;
        let mut correct = 0usize;
        let mut mislead = if cfg.kind == ModelKind::DistHd { vec![0.0f64; dim] } else { Vec::new() };

        for (i, h) in encodings.iter().enumerate() {
            let y = labels[i] as usize;
            let (sims, norms, _) = mem.sims_full(h);
            let (pred, second) = top_two(&sims);
            if pred == y {
                correct += 1;
            }
            // DistHD bookkeeping, with the class vectors as seen at decision
            // time: for misses whose true class was the runner-up, record how
            // much each dimension pulled the sample toward the winner and
            // away from the truth.
            if cfg.kind == ModelKind::DistHd && pred != y && second == y {
                let (np, nt) = (norms[pred], norms[y]);
                if np > 0.0 && nt > 0.0 {
                    let cp = mem.class_vector(pred).as_slice();
                    let ct = mem.class_vector(y).as_slice();
                    let hs = h.as_slice();
                    for j in 0..dim {
                        mislead[j] += (cp[j] as f64 / np - ct[j] as f64 / nt) * hs[j] as f64;
                    }
                }
            }
            match cfg.kind {
                ModelKind::Adapt | ModelKind::NeuralHd | ModelKind::DistHd => {
                    if pred != y {
                        mem.add(y, h, lr)?;
                        mem.add(pred, h, -lr)?;
                    }
                }
                ModelKind::Online => {
                    mem.add(y, h, lr * (1.0 - clamp01(sims[y])) as f32)?;
                    if pred != y {
                        mem.add(pred, h, -lr * (1.0 - clamp01(sims[pred])) as f32)?;
                    }
                }
                ModelKind::Refine => {
                    let gap = (sims[pred] - sims[second]) as f64;
                    if pred != y {
                        mem.add(y, h, lr * (1.0 - clamp01(sims[y])) as f32)?;
                        mem.add(pred, h, -lr * (1.0 - clamp01(sims[pred])) as f32)?;
                    } else if gap < margin.current() {
                        mem.add(y, h, lr * (1.0 - clamp01(sims[y])) as f32)?;
                        mem.add(second, h, -lr * (1.0 - clamp01(sims[second])) as f32)?;
                    }
                    margin.observe(gap);
                }
                ModelKind::Vanilla => unreachable!(),
            }
        }

        let acc = correct as f64 / labels.len() as f64;
        epoch_accuracy.push(acc);

        let plateau = cfg.early_stop
            && epoch_accuracy.len() >= 4
            && epoch_accuracy[epoch_accuracy.len() - 1] - epoch_accuracy[epoch_accuracy.len() - 4]
                < 0.001;
        let last = epoch == cfg.epochs || plateau;
        if last {
            break;
        }

        if cfg.kind.regenerates() && regen_per_epoch > 0 {
            let scores = match cfg.kind {
                ModelKind::NeuralHd => neural_scores(&mem),
                ModelKind::DistHd => mislead.clone(),
                _ => unreachable!(),
            };
            let dims = select_dims(&scores, regen_per_epoch, cfg.kind == ModelKind::NeuralHd);
            source.regenerate_dims(&dims)?;
            mem.zero_dims(&dims);
            regenerated_total += dims.len();
            encodings = encode_all(source)?;
        }
    }

    Ok(TrainOutcome {
        memory: mem,
        epochs_run,
        epoch_accuracy,
        regenerated_dims: regenerated_total,
    })
}

/// Trains on pre-encoded hypervectors.
pub fn train_encoded(
    cfg: &TrainConfig,
    encodings: Vec<Hypervector>,
    labels: &[u8],
) -> Result<TrainOutcome> {
    let mut source = FixedEncodings::new(encodings)?;
    train(cfg, &mut source, labels)
}
