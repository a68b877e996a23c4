//! Bar Crawl ingestion: accelerometer parsing, TAC conditioning, windowing,
//! labeling, and train/test splitting.
//!
//! The dataset ships as one large accelerometer CSV (`time,pid,x,y,z`, epoch
//! milliseconds) plus one cleaned TAC file per participant
//! (`clean_tac/<PID>_clean_TAC.csv`, epoch seconds). TAC is smoothed with a
//! zero-phase low-pass, shifted 45 minutes backward to undo transdermal lag,
//! and interpolated at each window's midpoint to produce the binary label.

mod cache;
mod ingest;
mod tac;
mod windows;

pub use cache::{load_cache, save_cache, CachedSet};
pub use ingest::{load_accel, load_tac, parse_accel_row, AccelLoad, ParticipantStream};
pub use tac::{filter_tac, interpolate_tac, shift_tac};
pub use windows::{label_windows, split, window_stream, SplitMode};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, RawWindow};

/// Default TAC threshold separating sober from drunk windows.
pub const TAC_THRESHOLD: f64 = 0.08;
/// Default backward shift applied to TAC timestamps, in minutes.
pub const TAC_SHIFT_MIN: f64 = 45.0;
/// Default smoothing time constant for the TAC low-pass, in seconds
/// (90 minutes — three reading intervals).
pub const TAC_TAU_S: f64 = 90.0 * 60.0;
/// Default window stride in samples (50 % overlap).
pub const DEFAULT_STRIDE: usize = 200;

/// One accelerometer row.
#[derive(Clone, Debug, PartialEq)]
pub struct AccelRecord {
    /// Epoch milliseconds.
    pub time: i64,
    pub pid: String,
    pub x: f32,
    pub y: f32,
    pub z: f32,
}

/// One transdermal alcohol reading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TacRecord {
    /// Epoch seconds.
    pub timestamp: f64,
    pub tac: f64,
}

/// A labeled window: raw samples, the full computed feature catalog, the
/// interpolated TAC at the window midpoint, and the binary label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub window: RawWindow,
    pub features: FeatureVector,
    pub tac: f64,
    /// 0 sober, 1 drunk; always equals `tac >= threshold`.
    pub label: u8,
}

impl LabeledSample {
    pub fn pid(&self) -> &str {
        self.window.pid()
    }

    /// Window start, epoch milliseconds.
    pub fn window_start(&self) -> i64 {
        self.window.start_time()
    }
}

/// Counters accumulated across a full ingest run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub accel_rows: u64,
    pub malformed_rows: u64,
    pub out_of_order_rows: u64,
    pub duplicate_times: u64,
    pub participants: u64,
    pub tac_files_missing: u64,
    pub tac_readings: u64,
    pub short_tac_series: u64,
    pub windows_total: u64,
    pub windows_dropped_gap: u64,
    pub windows_dropped_coverage: u64,
    pub samples: u64,
    pub drunk_samples: u64,
}

impl IngestStats {
    pub(crate) fn to_words(&self) -> [u64; 13] {
        [
            self.accel_rows,
            self.malformed_rows,
            self.out_of_order_rows,
            self.duplicate_times,
            self.participants,
            self.tac_files_missing,
            self.tac_readings,
            self.short_tac_series,
            self.windows_total,
            self.windows_dropped_gap,
            self.windows_dropped_coverage,
            self.samples,
            self.drunk_samples,
        ]
    }

    pub(crate) fn from_words(w: [u64; 13]) -> Self {
        IngestStats {
            accel_rows: w[0],
            malformed_rows: w[1],
            out_of_order_rows: w[2],
            duplicate_times: w[3],
            participants: w[4],
            tac_files_missing: w[5],
            tac_readings: w[6],
            short_tac_series: w[7],
            windows_total: w[8],
            windows_dropped_gap: w[9],
            windows_dropped_coverage: w[10],
            samples: w[11],
            drunk_samples: w[12],
        }
    }
}

fn validate_ratio(ratio: f64) -> Result<()> {
    if !(ratio.is_finite() && 0.0 < ratio && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!("split ratio {ratio} outside (0, 1)")));
    }
    Ok(())
}
