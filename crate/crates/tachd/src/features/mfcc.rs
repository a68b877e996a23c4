//! Mel-frequency cepstral coefficients and their cross-axis covariance.
//!
//! Each axis series is cut into short frames, every frame is reduced to a
//! small cepstral vector, and the per-window summary is the covariance of
//! those vectors between axis pairs. Gait has most of its energy well below
//! the 20 Hz Nyquist limit of a 40 Hz accelerometer stream, so the mel bank
//! spans the full 0-20 Hz band.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Frame length in samples (1.6 s at 40 Hz).
pub const FRAME_LEN: usize = 64;
/// Hop between frame starts (50 % overlap).
pub const FRAME_HOP: usize = 32;
/// Number of triangular mel filters.
pub const N_FILTERS: usize = 20;
/// Cepstral coefficients kept per frame.
pub const N_COEFFS: usize = 12;

/// Floor added inside the log to keep silent filters finite.
const LOG_FLOOR: f64 = 1e-10;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// MFCC extraction state shared across windows.
pub struct MfccExtractor {
    sample_rate: f64,
    fft: Arc<dyn Fft<f64>>,
    /// `filters[m][k]`: weight of FFT bin `k` in mel filter `m`.
    filters: Vec<Vec<f64>>,
    /// `dct[p][m]`: orthonormal DCT-II basis, coefficient `p` from filter `m`.
    dct: Vec<Vec<f64>>,
}

impl MfccExtractor {
    pub fn new(sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("bad sample rate {sample_rate}")));
        }
        let n_bins = FRAME_LEN / 2 + 1;
        let f_max = sample_rate / 2.0;
        // Filter edges equally spaced on the mel scale from 0 to Nyquist.
        let edges: Vec<f64> = (0..N_FILTERS + 2)
            .map(|i| mel_to_hz(hz_to_mel(f_max) * i as f64 / (N_FILTERS + 1) as f64))
            .collect();
        let mut filters = vec![vec![0.0; n_bins]; N_FILTERS];
        for m in 0..N_FILTERS {
            let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
            for (k, w) in filters[m].iter_mut().enumerate() {
                let f = k as f64 * sample_rate / FRAME_LEN as f64;
                if f > left && f < center {
                    *w = (f - left) / (center - left);
                } else if (f - center).abs() == 0.0 {
                    *w = 1.0;
                } else if f > center && f < right {
                    *w = (right - f) / (right - center);
                }
            }
        }
        let norm0 = (1.0 / N_FILTERS as f64).sqrt();
        let norm = (2.0 / N_FILTERS as f64).sqrt();
        let dct = (0..N_COEFFS)
            .map(|p| {
                (0..N_FILTERS)
                    .map(|m| {
                        let s = if p == 0 { norm0 } else { norm };
                        s * (std::f64::consts::PI * p as f64 * (2 * m + 1) as f64
                            / (2 * N_FILTERS) as f64)
                            .cos()
                    })
                    .collect()
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(FRAME_LEN);
        Ok(MfccExtractor { sample_rate, fft, filters, dct })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Number of frames produced from a series of `len` samples.
    pub fn frame_count(len: usize) -> usize {
        if len < FRAME_LEN {
            0
        } else {
            (len - FRAME_LEN) / FRAME_HOP + 1
        }
    }

    /// Cepstral coefficients for one rectangular-windowed frame.
    fn frame_coeffs(&self, frame: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        let power: Vec<f64> = buf[..=FRAME_LEN / 2].iter().map(|c| c.norm_sqr()).collect();
        let log_energy: Vec<f64> = self
            .filters
            .iter()
            .map(|w| {
                let e: f64 = w.iter().zip(&power).map(|(wk, pk)| wk * pk).sum();
                (e + LOG_FLOOR).ln()
            })
            .collect();
        self.dct
            .iter()
            .map(|row| row.iter().zip(&log_energy).map(|(d, l)| d * l).sum())
            .collect()
    }

    /// MFCC matrix of a series: `frame_count` rows of [`N_COEFFS`] columns,
    /// flattened row-major.
    pub fn coefficients(&self, series: &[f64]) -> Result<Vec<f64>> {
        let frames = Self::frame_count(series.len());
        if frames == 0 {
            return Err(Error::InvalidDimension(format!(
                "series of {} samples is shorter than one {FRAME_LEN}-sample frame",
                series.len()
            )));
        }
        let mut out = Vec::with_capacity(frames * N_COEFFS);
        for f in 0..frames {
            let start = f * FRAME_HOP;
            out.extend(self.frame_coeffs(&series[start..start + FRAME_LEN]));
        }
        Ok(out)
    }
}

/// Unbiased cross-covariance between two MFCC matrices (same frame count),
/// flattened row-major to `N_COEFFS * N_COEFFS` values:
/// `C[p][q] = sum_f (a[f][p] - mean_a[p]) (b[f][q] - mean_b[q]) / (F - 1)`.
pub fn cross_covariance(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch { left: a.len(), right: b.len() });
    }
    if a.len() % N_COEFFS != 0 {
        return Err(Error::InvalidDimension(format!(
            "MFCC matrix length {} is not a multiple of {N_COEFFS}",
            a.len()
        )));
    }
    let frames = a.len() / N_COEFFS;
    if frames < 2 {
        return Err(Error::InvalidDimension("covariance needs at least two frames".into()));
    }
    let mean = |m: &[f64], c: usize| -> f64 {
        (0..frames).map(|f| m[f * N_COEFFS + c]).sum::<f64>() / frames as f64
    };
    let ma: Vec<f64> = (0..N_COEFFS).map(|c| mean(a, c)).collect();
    let mb: Vec<f64> = (0..N_COEFFS).map(|c| mean(b, c)).collect();
    let mut out = vec![0.0; N_COEFFS * N_COEFFS];
    for p in 0..N_COEFFS {
        for q in 0..N_COEFFS {
            let mut acc = 0.0;
            for f in 0..frames {
                acc += (a[f * N_COEFFS + p] - ma[p]) * (b[f * N_COEFFS + q] - mb[q]);
            }
            out[p * N_COEFFS + q] = acc / (frames - 1) as f64;
        }
    }
    Ok(out)
}
