//! Synthetic dataset generator in the Bar Crawl file layout.
//!
//! Produces an accelerometer CSV plus per-participant TAC files whose
//! drinking episodes actually change the simulated gait, so the full
//! pipeline (conditioning, windowing, labeling, training) can run and
//! learn without the real recordings. TAC rows are written on the sensor's
//! clock — 45 minutes behind the motion — so the pipeline's backward shift
//! re-aligns them.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dataset::TAC_THRESHOLD;
use crate::error::{Error, Result};
use crate::pipeline::{ACCEL_FILE, TAC_DIR};
use crate::rng::Rng;

/// Transdermal sensing lag baked into the generated TAC timestamps, s.
const SENSOR_LAG_S: f64 = 45.0 * 60.0;
/// Sample period, ms (40 Hz).
const STEP_MS: i64 = 25;

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub seed: u64,
    pub participants: usize,
    /// Recording length per participant, minutes.
    pub minutes_per_pid: f64,
    /// Spacing of TAC readings, seconds.
    pub tac_interval_s: f64,
    /// Per-second probability of a recording dropout (creates gap windows).
    pub gap_probability: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            participants: 13,
            minutes_per_pid: 40.0,
            tac_interval_s: 120.0,
            gap_probability: 0.0,
        }
    }
}

impl SynthConfig {
    /// A pipeline smoothing constant proportionate to the generated episode
    /// length. The default 90 minutes suits day-long recordings with
    /// 30-minute readings; a short synthetic episode needs a shorter
    /// constant or the low-pass flattens it below the label threshold.
    pub fn suggested_tau_min(&self) -> f64 {
        (self.tac_interval_s / 60.0).max(self.minutes_per_pid / 40.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthSummary {
    pub pids: Vec<String>,
    pub accel_rows: u64,
    pub tac_rows: u64,
}

/// One participant's drinking episode, in seconds relative to their start.
struct Episode {
    ramp_start: f64,
    ramp_len: f64,
    peak: f64,
    fall_start: f64,
    fall_len: f64,
    baseline: f64,
}

impl Episode {
    fn draw(rng: &mut Rng, duration_s: f64) -> Self {
        Episode {
            ramp_start: duration_s * rng.uniform(0.20, 0.30),
            ramp_len: duration_s * 0.08,
            peak: rng.uniform(0.13, 0.20),
            fall_start: duration_s * rng.uniform(0.65, 0.75),
            fall_len: duration_s * 0.10,
            baseline: rng.uniform(0.005, 0.02),
        }
    }

    /// True TAC at motion time `t` (seconds from the participant's start).
    fn tac(&self, t: f64) -> f64 {
        let lerp = |a: f64, b: f64, w: f64| a + (b - a) * w.clamp(0.0, 1.0);
        if t < self.ramp_start {
            self.baseline
        } else if t < self.ramp_start + self.ramp_len {
            lerp(self.baseline, self.peak, (t - self.ramp_start) / self.ramp_len)
        } else if t < self.fall_start {
            self.peak
        } else {
            lerp(self.peak, self.baseline, (t - self.fall_start) / self.fall_len)
        }
    }
}

/// Gait accelerations: a drunk walk is slower, sways wider, and is noisier.
fn gait(drunk: bool, t: f64, phase: [f64; 3], rng: &mut Rng) -> [f32; 3] {
    let (freq, amp, jitter) = if drunk { (1.05, 0.8, 0.12) } else { (1.9, 0.35, 0.03) };
    let w = std::f64::consts::TAU * freq * t;
    let x = amp * (w + phase[0]).sin()
        + 0.25 * amp * (2.0 * w + phase[1]).sin()
        + jitter * rng.standard_normal();
    let y = 0.6 * amp * (w + phase[1]).cos() + jitter * rng.standard_normal();
    let z = 1.0 + 0.3 * amp * (2.0 * w + phase[2]).sin() + jitter * rng.standard_normal();
    [x as f32, y as f32, z as f32]
}

fn synth_pid(rng: &mut Rng) -> String {
    let letters: String = (0..2)
        .map(|_| (b'A' + rng.index(26) as u8) as char)
        .collect();
    format!("{letters}{:04}", rng.index(10_000))
}

/// Writes the synthetic dataset into `dir` (creating it), in the exact Bar
/// Crawl layout: `all_accelerometer_data_pids_13.csv` and
/// `clean_tac/<PID>_clean_TAC.csv`.
pub fn generate(dir: &Path, cfg: &SynthConfig) -> Result<SynthSummary> {
    if cfg.participants == 0 || cfg.minutes_per_pid <= 0.0 {
        return Err(Error::InvalidConfig(
            "synthetic dataset needs at least one participant and a positive duration".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.gap_probability) {
        return Err(Error::InvalidConfig(format!(
            "gap probability {} outside [0, 1]",
            cfg.gap_probability
        )));
    }
    fs::create_dir_all(dir.join(TAC_DIR))?;
    let root = Rng::from_seed(cfg.seed);

    let mut pid_rng = root.derive("synth.pids");
    let mut pids = Vec::with_capacity(cfg.participants);
    while pids.len() < cfg.participants {
        let pid = synth_pid(&mut pid_rng);
        if !pids.contains(&pid) {
            pids.push(pid);
        }
    }

    let mut accel = BufWriter::new(fs::File::create(dir.join(ACCEL_FILE))?);
    writeln!(accel, "time,pid,x,y,z")?;

    let duration_s = cfg.minutes_per_pid * 60.0;
    let base_ms: i64 = 1_493_700_000_000;
    let mut accel_rows = 0u64;
    let mut tac_rows = 0u64;

    for (i, pid) in pids.iter().enumerate() {
        let mut rng = root.derive(&format!("synth.{pid}"));
        let episode = Episode::draw(&mut rng, duration_s);
        let phase = [
            rng.uniform(0.0, std::f64::consts::TAU),
            rng.uniform(0.0, std::f64::consts::TAU),
            rng.uniform(0.0, std::f64::consts::TAU),
        ];
        // Sessions overlap in wall time, like a real multi-phone recording.
        let start_ms = base_ms + i as i64 * 7 * 60_000;

        let mut t_ms: i64 = 0;
        let end_ms = (duration_s * 1000.0) as i64;
        while t_ms < end_ms {
            let t = t_ms as f64 / 1000.0;
            let drunk = episode.tac(t) >= TAC_THRESHOLD;
            let [x, y, z] = gait(drunk, t, phase, &mut rng);
            writeln!(accel, "{},{pid},{x:.6},{y:.6},{z:.6}", start_ms + t_ms)?;
            accel_rows += 1;
            t_ms += STEP_MS;
            if cfg.gap_probability > 0.0
                && t_ms % 1000 == 0
                && rng.uniform(0.0, 1.0) < cfg.gap_probability
            {
                t_ms += rng.uniform(5_000.0, 30_000.0) as i64;
            }
        }

        // TAC rows on the sensor clock: value measured now reflects the
        // body 45 minutes ago. Coverage extends past both ends so every
        // window's shifted midpoint interpolates.
        let mut tac = BufWriter::new(
            fs::File::create(dir.join(TAC_DIR).join(format!("{pid}_clean_TAC.csv")))?,
        );
        writeln!(tac, "timestamp,TAC_Reading")?;
        let start_s = (start_ms as f64) / 1000.0;
        let mut ts = start_s - 3600.0;
        let end_s = start_s + duration_s + SENSOR_LAG_S + 3600.0;
        while ts <= end_s {
            let v = episode.tac(ts - SENSOR_LAG_S - start_s);
            writeln!(tac, "{ts:.0},{v:.6}")?;
            tac_rows += 1;
            ts += cfg.tac_interval_s;
        }
        tac.flush()?;
    }
    accel.flush()?;
    Ok(SynthSummary { pids, accel_rows, tac_rows })
}
