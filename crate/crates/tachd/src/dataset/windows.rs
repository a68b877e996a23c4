//! Windowing the accelerometer stream, TAC labeling, and splitting.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::{interpolate_tac, validate_ratio, LabeledSample, TacRecord};
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, RawWindow, SAMPLE_RATE};
use crate::rng::Rng;

/// Contiguity bound: windows spanning more than twice the nominal duration
/// (2 x 400 samples at 25 ms) contain a gap and are dropped.
fn max_span_ms(len: usize) -> i64 {
    (2.0 * len as f64 * 1000.0 / SAMPLE_RATE).round() as i64
}

/// Cuts one participant's stream into fixed-length windows advancing by
/// `stride`. Returns the windows plus the count dropped for spanning a gap.
/// The short tail is discarded.
pub fn window_stream(
    pid: &str,
    times: &[i64],
    samples: &[[f32; 3]],
    len: usize,
    stride: usize,
) -> Result<(Vec<RawWindow>, u64)> {
    if len == 0 || stride == 0 {
        return Err(Error::InvalidConfig("window length and stride must be positive".into()));
    }
    if times.len() != samples.len() {
        return Err(Error::DimMismatch { left: times.len(), right: samples.len() });
    }
    let bound = max_span_ms(len);
    let mut windows = Vec::new();
    let mut dropped = 0u64;
    let mut start = 0usize;
    while start + len <= times.len() {
        let t = &times[start..start + len];
        if t[len - 1] - t[0] > bound {
            dropped += 1;
        } else {
            windows.push(RawWindow::new(pid, t.to_vec(), samples[start..start + len].to_vec())?);
        }
        start += stride;
    }
    Ok((windows, dropped))
}

/// Labels windows against a conditioned (filtered + shifted) TAC series and
/// computes the full feature catalog for each. Windows whose midpoint falls
/// outside the TAC coverage are dropped and counted.
pub fn label_windows(
    windows: Vec<RawWindow>,
    tac: &[TacRecord],
    threshold: f64,
    extractor: &FeatureExtractor,
) -> Result<(Vec<LabeledSample>, u64)> {
    let mut covered = Vec::with_capacity(windows.len());
    let mut dropped = 0u64;
    for w in windows {
        match interpolate_tac(tac, w.midpoint_ms() / 1000.0) {
            Some(t) => covered.push((w, t)),
            None => dropped += 1,
        }
    }
    let samples: Vec<LabeledSample> = covered
        .into_par_iter()
        .map(|(window, tac)| {
            let features = extractor.compute_catalog(&window)?;
            Ok(LabeledSample {
                window,
                features: crate::features::FeatureVector::new(features)?,
                tac,
                label: u8::from(tac >= threshold),
            })
        })
        .collect::<Result<_>>()?;
    Ok((samples, dropped))
}

/// Train/test partition strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMode {
    /// Seeded uniform shuffle of all windows, then a ratio cut.
    Shuffled,
    /// Sort by window start across participants; the tail is the test set.
    Chronological,
}

impl SplitMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitMode::Shuffled => "shuffled",
            SplitMode::Chronological => "ordered",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "shuffled" => Ok(SplitMode::Shuffled),
            "ordered" | "chronological" => Ok(SplitMode::Chronological),
            _ => Err(Error::InvalidConfig(format!(
                "unknown split mode '{s}' (expected shuffled or ordered)"
            ))),
        }
    }
}

impl std::fmt::Display for SplitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn split_one(
    mut samples: Vec<LabeledSample>,
    mode: SplitMode,
    ratio: f64,
    rng: &mut Rng,
) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    match mode {
        SplitMode::Shuffled => rng.shuffle(&mut samples),
        SplitMode::Chronological => {
            samples.sort_by(|a, b| {
                a.window_start().cmp(&b.window_start()).then_with(|| a.pid().cmp(b.pid()))
            });
        }
    }
    let train_len = (samples.len() as f64 * ratio).floor() as usize;
    let test = samples.split_off(train_len);
    (samples, test)
}

/// Splits samples into train/test.
///
/// `within_pid` applies the strategy separately inside each participant
/// (every pid then appears in both sets); the default mixes all windows.
pub fn split(
    samples: Vec<LabeledSample>,
    mode: SplitMode,
    ratio: f64,
    seed: u64,
    within_pid: bool,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    validate_ratio(ratio)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput("splitting an empty sample set".into()));
    }
    let mut rng = Rng::from_seed(seed).derive("split");
    if !within_pid {
        return Ok(split_one(samples, mode, ratio, &mut rng));
    }
    let mut groups: BTreeMap<String, Vec<LabeledSample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.pid().to_string()).or_default().push(s);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, group) in groups {
        let (tr, te) = split_one(group, mode, ratio, &mut rng);
        train.extend(tr);
        test.extend(te);
    }
    Ok((train, test))
}
