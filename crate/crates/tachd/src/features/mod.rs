//! Windowed feature extraction.
//!
//! A [`RawWindow`] is a fixed-length slice of one participant's triaxial
//! accelerometer stream. The [`FeatureExtractor`] reduces it to a catalog of
//! scalar descriptors — per-axis statistics, spectral shape, and
//! MFCC cross-covariances — from which a [`FeatureSpec`] selects the subset
//! actually fed to the encoders.

pub mod mfcc;
pub mod spectral;
pub mod stats;

pub use mfcc::{cross_covariance, MfccExtractor, N_COEFFS, N_FILTERS};
pub use spectral::{SpectralFeatures, SpectrumAnalyzer};
pub use stats::{basic_stats, time_entropy, BasicStats};

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Samples per pipeline window (10 s at 40 Hz).
pub const WINDOW_LEN: usize = 400;
/// Nominal accelerometer sampling rate (Hz).
pub const SAMPLE_RATE: f64 = 40.0;
/// Axis names in storage order.
pub const AXES: [&str; 3] = ["x", "y", "z"];
/// Axis-index pairs whose MFCC covariance enters the catalog.
pub const MFCC_PAIRS: [(usize, usize, &str); 6] =
    [(0, 0, "xx"), (1, 1, "yy"), (2, 2, "zz"), (0, 1, "xy"), (0, 2, "xz"), (1, 2, "yz")];

const SCALARS_PER_AXIS: usize = 8;
/// Size of the full feature catalog.
pub const CATALOG_LEN: usize =
    3 * SCALARS_PER_AXIS + MFCC_PAIRS.len() * N_COEFFS * N_COEFFS;

/// One windowed slice of raw accelerometer data.
#[derive(Clone, Debug, PartialEq)]
pub struct RawWindow {
    pid: String,
    /// Per-sample timestamps, milliseconds since the Unix epoch, strictly
    /// increasing.
    times: Vec<i64>,
    /// `[x, y, z]` acceleration per sample, in g.
    samples: Vec<[f32; 3]>,
}

impl RawWindow {
    /// Builds a window, validating that timestamps and samples line up and
    /// that time strictly increases. Pipeline windows always hold
    /// [`WINDOW_LEN`] samples; the type itself only requires a non-empty,
    /// consistent slice so shorter synthetic windows can be constructed in
    /// isolation.
    pub fn new(pid: impl Into<String>, times: Vec<i64>, samples: Vec<[f32; 3]>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("window with no samples".into()));
        }
        if times.len() != samples.len() {
            return Err(Error::DimMismatch { left: times.len(), right: samples.len() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidValue("window timestamps must strictly increase".into()));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("window contains non-finite samples".into()));
        }
        Ok(RawWindow { pid: pid.into(), times, samples })
    }

    /// Builds a window with nominal 40 Hz timestamps starting at `start_ms`.
    pub fn with_nominal_times(
        pid: impl Into<String>,
        start_ms: i64,
        samples: Vec<[f32; 3]>,
    ) -> Result<Self> {
        let times = (0..samples.len() as i64).map(|i| start_ms + i * 25).collect();
        RawWindow::new(pid, times, samples)
    }

    pub fn pid(&self) -> &str {
        &self.pid
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[[f32; 3]] {
        &self.samples
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn start_time(&self) -> i64 {
        self.times[0]
    }

    pub fn end_time(&self) -> i64 {
        *self.times.last().unwrap()
    }

    /// Midpoint between the first and last sample timestamps (ms).
    pub fn midpoint_ms(&self) -> f64 {
        (self.start_time() as f64 + self.end_time() as f64) / 2.0
    }

    /// Copies one axis out as an `f64` series.
    pub fn axis(&self, a: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[a] as f64).collect()
    }
}

/// A selected, finite feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("empty feature vector".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite feature value {v}")));
        }
        Ok(FeatureVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Identifiers of every catalog entry, in catalog order.
pub fn catalog_ids() -> &'static [String] {
    static IDS: OnceLock<Vec<String>> = OnceLock::new();
    IDS.get_or_init(|| {
        let mut ids = Vec::with_capacity(CATALOG_LEN);
        for axis in AXES {
            for kind in
                ["mean", "std", "median", "rms", "centroid", "spread", "entropy_freq", "entropy_time"]
            {
                ids.push(format!("{axis}_{kind}"));
            }
        }
        for (_, _, pair) in MFCC_PAIRS {
            for p in 0..N_COEFFS {
                for q in 0..N_COEFFS {
                    ids.push(format!("mfcc_cov_{pair}_{p}_{q}"));
                }
            }
        }
        debug_assert_eq!(ids.len(), CATALOG_LEN);
        ids
    })
}

fn catalog_index() -> &'static HashMap<&'static str, usize> {
    static MAP: OnceLock<HashMap<&'static str, usize>> = OnceLock::new();
    MAP.get_or_init(|| {
        catalog_ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    })
}

/// An ordered selection of catalog features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSpec {
    selection: Vec<usize>,
}

impl FeatureSpec {
    /// Selects catalog entries by index.
    pub fn from_indices(selection: Vec<usize>) -> Result<Self> {
        if selection.is_empty() {
            return Err(Error::EmptyInput("feature selection is empty".into()));
        }
        if let Some(&bad) = selection.iter().find(|&&i| i >= CATALOG_LEN) {
            return Err(Error::InvalidConfig(format!(
                "feature index {bad} out of catalog range {CATALOG_LEN}"
            )));
        }
        let mut seen = vec![false; CATALOG_LEN];
        for &i in &selection {
            if seen[i] {
                return Err(Error::InvalidConfig(format!(
                    "duplicate feature '{}' in selection",
                    catalog_ids()[i]
                )));
            }
            seen[i] = true;
        }
        Ok(FeatureSpec { selection })
    }

    /// The default 120-feature selection: all 24 per-axis scalars plus the
    /// low-order 4x4 block of every MFCC covariance pair.
    pub fn default_selection() -> Self {
        let mut selection: Vec<usize> = (0..3 * SCALARS_PER_AXIS).collect();
        let base = 3 * SCALARS_PER_AXIS;
        for pair in 0..MFCC_PAIRS.len() {
            for p in 0..4 {
                for q in 0..4 {
                    selection.push(base + pair * N_COEFFS * N_COEFFS + p * N_COEFFS + q);
                }
            }
        }
        FeatureSpec { selection }
    }

    /// Selects the complete catalog.
    pub fn full_catalog() -> Self {
        FeatureSpec { selection: (0..CATALOG_LEN).collect() }
    }

    /// Parses a selection file: one feature id per line, `#` comments and
    /// blank lines ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_names(text.lines())
    }

    /// Builds a selection from feature ids.
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let index = catalog_index();
        let mut selection = Vec::new();
        for raw in names {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let &i = index
                .get(line)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown feature id '{line}'")))?;
            selection.push(i);
        }
        Self::from_indices(selection)
    }

    pub fn len(&self) -> usize {
        self.selection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.selection
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.selection.iter().map(|&i| catalog_ids()[i].as_str()).collect()
    }

    /// Writes the selection in the format accepted by [`FeatureSpec::from_file`].
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for name in self.names() {
            text.push_str(name);
            text.push('\n');
        }
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Computes the feature catalog for fixed-length windows.
pub struct FeatureExtractor {
    window_len: usize,
    spectrum: SpectrumAnalyzer,
    mfcc: MfccExtractor,
}

impl FeatureExtractor {
    pub fn new(window_len: usize, sample_rate: f64) -> Result<Self> {
        if MfccExtractor::frame_count(window_len) < 2 {
            return Err(Error::InvalidConfig(format!(
                "window of {window_len} samples is too short for MFCC covariance"
            )));
        }
        Ok(FeatureExtractor {
            window_len,
            spectrum: SpectrumAnalyzer::new(window_len, sample_rate)?,
            mfcc: MfccExtractor::new(sample_rate)?,
        })
    }

    /// Extractor for the standard 400-sample, 40 Hz pipeline window.
    pub fn standard() -> Self {
        FeatureExtractor::new(WINDOW_LEN, SAMPLE_RATE).expect("standard window is valid")
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Computes the full catalog (length [`CATALOG_LEN`]) for a window.
    pub fn compute_catalog(&self, window: &RawWindow) -> Result<Vec<f64>> {
        if window.len() != self.window_len {
            return Err(Error::DimMismatch { left: window.len(), right: self.window_len });
        }
        let mut out = Vec::with_capacity(CATALOG_LEN);
        let axes: Vec<Vec<f64>> = (0..3).map(|a| window.axis(a)).collect();
        for series in &axes {
            let s = basic_stats(series)?;
            let d = self.spectrum.descriptors(series)?;
            let h = time_entropy(series)?;
            out.extend([s.mean, s.std, s.median, s.rms, d.centroid, d.spread, d.entropy, h]);
        }
        let coeffs: Vec<Vec<f64>> =
            axes.iter().map(|s| self.mfcc.coefficients(s)).collect::<Result<_>>()?;
        for (a, b, _) in MFCC_PAIRS {
            out.extend(cross_covariance(&coeffs[a], &coeffs[b])?);
        }
        debug_assert_eq!(out.len(), CATALOG_LEN);
        Ok(out)
    }

    /// Computes the catalog and keeps only the selected features.
    pub fn assemble(&self, window: &RawWindow, spec: &FeatureSpec) -> Result<FeatureVector> {
        let all = self.compute_catalog(window)?;
        FeatureVector::new(spec.selection.iter().map(|&i| all[i]).collect())
    }
}
