//! Reference implementations shared by the oracle and acceptance suites.
//! Nothing here calls into the library's numerics: the DFT is the naive
//! O(n^2) sum and the MFCC tables are built inline from their definitions.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use tachd::rng::Rng;

pub const SAMPLE_RATE: f64 = 40.0;
pub const FRAME_LEN: usize = 64;
pub const FRAME_HOP: usize = 32;
pub const N_FILTERS: usize = 20;
pub const N_COEFFS: usize = 12;

pub fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * (1.0 + want.abs())
}

pub fn random_series(seed: u64, n: usize, amp: f64) -> Vec<f64> {
    let mut rng = Rng::from_seed(seed);
    (0..n).map(|_| rng.uniform(-amp, amp)).collect()
}

/// Naive O(n^2) DFT, one-sided magnitudes for `k = 0 ..= n/2`.
pub fn naive_dft_magnitudes(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    (0..=n / 2)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (t, &x) in series.iter().enumerate() {
                let phase = -TAU * k as f64 * t as f64 / n as f64;
                re += x * phase.cos();
                im += x * phase.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters with edges equally spaced on the mel scale between
/// 0 Hz and Nyquist, evaluated as clipped two-sided ramps.
pub fn reference_filters() -> Vec<Vec<f64>> {
    let nyquist = SAMPLE_RATE / 2.0;
    let edges: Vec<f64> = (0..N_FILTERS + 2)
        .map(|i| mel_to_hz(hz_to_mel(nyquist) * i as f64 / (N_FILTERS + 1) as f64))
        .collect();
    (0..N_FILTERS)
        .map(|m| {
            let (l, c, r) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..=FRAME_LEN / 2)
                .map(|k| {
                    let f = k as f64 * SAMPLE_RATE / FRAME_LEN as f64;
                    let rising = (f - l) / (c - l);
                    let falling = (r - f) / (r - c);
                    rising.min(falling).max(0.0)
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II of the log filter energies, first `N_COEFFS` rows.
pub fn reference_dct(log_energy: &[f64]) -> Vec<f64> {
    (0..N_COEFFS)
        .map(|p| {
            let scale = if p == 0 {
                (1.0 / N_FILTERS as f64).sqrt()
            } else {
                (2.0 / N_FILTERS as f64).sqrt()
            };
            log_energy
                .iter()
                .enumerate()
                .map(|(m, &e)| {
                    scale * e * (PI * p as f64 * (2 * m + 1) as f64 / (2 * N_FILTERS) as f64).cos()
                })
                .sum()
        })
        .collect()
}

/// Frame-major MFCC matrix computed with the naive DFT and inline tables.
pub fn reference_mfcc(series: &[f64]) -> Vec<f64> {
    let filters = reference_filters();
    let frames = (series.len() - FRAME_LEN) / FRAME_HOP + 1;
    let mut out = Vec::with_capacity(frames * N_COEFFS);
    for f in 0..frames {
        let frame = &series[f * FRAME_HOP..f * FRAME_HOP + FRAME_LEN];
        let power: Vec<f64> =
            naive_dft_magnitudes(frame).into_iter().map(|m| m * m).collect();
        let log_energy: Vec<f64> = filters
            .iter()
            .map(|w| {
                let e: f64 = w.iter().zip(&power).map(|(wk, pk)| wk * pk).sum();
                (e + 1e-10).ln()
            })
            .collect();
        out.extend(reference_dct(&log_energy));
    }
    out
}

/// Unbiased covariance between two frame-major coefficient matrices.
pub fn reference_covariance(a: &[f64], b: &[f64]) -> Vec<f64> {
    let frames = a.len() / N_COEFFS;
    let col = |m: &[f64], c: usize| -> Vec<f64> {
        (0..frames).map(|f| m[f * N_COEFFS + c]).collect()
    };
    let mut out = Vec::with_capacity(N_COEFFS * N_COEFFS);
    for p in 0..N_COEFFS {
        let ap = col(a, p);
        let ma = ap.iter().sum::<f64>() / frames as f64;
        for q in 0..N_COEFFS {
            let bq = col(b, q);
            let mb = bq.iter().sum::<f64>() / frames as f64;
            let cov: f64 = ap
                .iter()
                .zip(&bq)
                .map(|(&x, &y)| (x - ma) * (y - mb))
                .sum::<f64>()
                / (frames - 1) as f64;
            out.push(cov);
        }
    }
    out
}
