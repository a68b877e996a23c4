//! Scalar time-domain statistics.

use crate::error::{Error, Result};

/// Basic per-series statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasicStats {
    pub mean: f64,
    /// Population standard deviation (divides by `n`).
    pub std: f64,
    pub median: f64,
    /// Root mean square.
    pub rms: f64,
}

/// Computes mean, population standard deviation, median and RMS of a series.
///
/// The median of an even-length series is the midpoint of the two middle
/// order statistics.
pub fn basic_stats(series: &[f64]) -> Result<BasicStats> {
    if series.is_empty() {
        return Err(Error::EmptyInput("statistics of an empty series".into()));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let rms = (series.iter().map(|&v| v * v).sum::<f64>() / n).sqrt();

    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };

    Ok(BasicStats { mean, std: var.sqrt(), median, rms })
}

/// Shannon entropy (nats) of the series' 32-bin amplitude histogram.
///
/// Bins span `[min, max]` of the series itself; a constant series puts all
/// mass in one bin and scores zero.
pub fn time_entropy(series: &[f64]) -> Result<f64> {
    const BINS: usize = 32;
    if series.is_empty() {
        return Err(Error::EmptyInput("entropy of an empty series".into()));
    }
    let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = [0usize; BINS];
    if hi > lo {
        let scale = BINS as f64 / (hi - lo);
        for &v in series {
            let b = (((v - lo) * scale) as usize).min(BINS - 1);
            counts[b] += 1;
        }
    } else {
        counts[0] = series.len();
    }
    let n = series.len() as f64;
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.ln();
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn stats_match_scalar_loops() {
        let mut rng = Rng::from_seed(21);
        let series: Vec<f64> = (0..400).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let s = basic_stats(&series).unwrap();

        let n = series.len() as f64;
        let mut sum = 0.0;
        for &v in &series {
            sum += v;
        }
        let mean = sum / n;
        let mut sq = 0.0;
        let mut acc = 0.0;
        for &v in &series {
            sq += (v - mean) * (v - mean);
            acc += v * v;
        }
        assert!((s.mean - mean).abs() <= 1e-9 * mean.abs().max(1.0));
        assert!((s.std - (sq / n).sqrt()).abs() <= 1e-9 * s.std.abs().max(1.0));
        assert!((s.rms - (acc / n).sqrt()).abs() <= 1e-9 * s.rms.abs().max(1.0));
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(basic_stats(&[3.0, 1.0, 2.0]).unwrap().median, 2.0);
        assert_eq!(basic_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap().median, 2.5);
    }

    #[test]
    fn constant_series() {
        let s = basic_stats(&[-1.5; 64]).unwrap();
        assert_eq!(s.mean, -1.5);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.median, -1.5);
        assert!((s.rms - 1.5).abs() < 1e-12);
        assert_eq!(time_entropy(&[-1.5; 64]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_orders_noise_above_structure() {
        let mut rng = Rng::from_seed(5);
        let noise: Vec<f64> = (0..4000).map(|_| rng.uniform(0.0, 1.0)).collect();
        let h_noise = time_entropy(&noise).unwrap();
        // Uniform noise approaches ln(32) ~ 3.466.
        assert!((h_noise - 32f64.ln()).abs() < 0.05, "h = {h_noise}");
        let spiky: Vec<f64> = (0..4000).map(|i| if i % 100 == 0 { 1.0 } else { 0.0 }).collect();
        assert!(time_entropy(&spiky).unwrap() < h_noise);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(basic_stats(&[]).is_err());
        assert!(time_entropy(&[]).is_err());
    }
}
