//! Frequency-domain descriptors of a single axis series.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Spectral descriptors over the one-sided magnitude spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralFeatures {
    /// Magnitude-weighted mean frequency (Hz).
    pub centroid: f64,
    /// Magnitude-weighted standard deviation around the centroid (Hz).
    pub spread: f64,
    /// Shannon entropy (nats) of the magnitude spectrum normalized to a
    /// distribution.
    pub entropy: f64,
}

/// FFT plan reused across windows for one series length.
pub struct SpectrumAnalyzer {
    len: usize,
    sample_rate: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl SpectrumAnalyzer {
    pub fn new(len: usize, sample_rate: f64) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidConfig("spectrum length must be positive".into()));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("bad sample rate {sample_rate}")));
        }
        let fft = FftPlanner::new().plan_fft_forward(len);
        Ok(SpectrumAnalyzer { len, sample_rate, fft })
    }

    /// One-sided magnitude spectrum `|X_k|` for `k = 0 ..= len/2`.
    pub fn magnitudes(&self, series: &[f64]) -> Result<Vec<f64>> {
        if series.len() != self.len {
            return Err(Error::DimMismatch { left: series.len(), right: self.len });
        }
        let mut buf: Vec<Complex<f64>> =
            series.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        Ok(buf[..=self.len / 2].iter().map(|c| c.norm()).collect())
    }

    /// Frequency (Hz) of one-sided bin `k`.
    pub fn bin_freq(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate / self.len as f64
    }

    /// Centroid, spread and spectral entropy of a series.
    ///
    /// A series with no spectral energy (all zeros) scores zero on all
    /// three descriptors.
    pub fn descriptors(&self, series: &[f64]) -> Result<SpectralFeatures> {
        let mags = self.magnitudes(series)?;
        let total: f64 = mags.iter().sum();
        if total <= 0.0 {
            return Ok(SpectralFeatures { centroid: 0.0, spread: 0.0, entropy: 0.0 });
        }
        let mut centroid = 0.0;
        for (k, &m) in mags.iter().enumerate() {
            centroid += self.bin_freq(k) * m;
        }
        centroid /= total;
        let mut var = 0.0;
        let mut entropy = 0.0;
        for (k, &m) in mags.iter().enumerate() {
            let df = self.bin_freq(k) - centroid;
            var += df * df * m;
            let p = m / total;
            if p > 0.0 {
                entropy -= p * p.ln();
            }
        }
        Ok(SpectralFeatures { centroid, spread: (var / total).sqrt(), entropy })
    }
}
