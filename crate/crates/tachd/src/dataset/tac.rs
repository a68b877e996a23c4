//! TAC conditioning: zero-phase smoothing, backward lag compensation, and
//! midpoint interpolation.

use crate::dataset::TacRecord;

/// Zero-phase low-pass: a first-order exponential smoother run forward and
/// then backward over the series, so the phase lags of the two passes
/// cancel. The per-step coefficient adapts to the (possibly irregular)
/// reading spacing: `alpha_i = 1 - exp(-dt_i / tau)`.
///
/// Series with fewer than 3 points pass through unchanged (the caller
/// tallies these).
pub fn filter_tac(series: &[TacRecord], tau_s: f64) -> Vec<TacRecord> {
    let mut out = series.to_vec();
    if series.len() < 3 || tau_s <= 0.0 {
        return out;
    }
    let pass = |vals: &mut Vec<TacRecord>, forward: bool| {
        let n = vals.len();
        let idx: Vec<usize> = if forward { (0..n).collect() } else { (0..n).rev().collect() };
        let mut prev = vals[idx[0]].tac;
        for w in idx.windows(2) {
            let (a, b) = (w[0], w[1]);
            let dt = (vals[b].timestamp - vals[a].timestamp).abs();
            let alpha = 1.0 - (-dt / tau_s).exp();
            prev += alpha * (vals[b].tac - prev);
            vals[b].tac = prev;
        }
    };
    pass(&mut out, true);
    pass(&mut out, false);
    out
}

/// Shifts every timestamp backward by `minutes` (the transdermal sensing
/// lag), so TAC readings line up with the motion that produced them.
pub fn shift_tac(series: &[TacRecord], minutes: f64) -> Vec<TacRecord> {
    series
        .iter()
        .map(|r| TacRecord { timestamp: r.timestamp - minutes * 60.0, tac: r.tac })
        .collect()
}

/// Linear interpolation of the series at time `t_s` (epoch seconds).
/// Returns `None` outside the series' coverage.
pub fn interpolate_tac(series: &[TacRecord], t_s: f64) -> Option<f64> {
    let first = series.first()?;
    let last = series.last()?;
    if t_s < first.timestamp || t_s > last.timestamp {
        return None;
    }
    let hi = series.partition_point(|r| r.timestamp < t_s);
    if hi == 0 {
        return Some(first.tac);
    }
    let b = series[hi.min(series.len() - 1)];
    let a = series[hi - 1];
    if b.timestamp == a.timestamp {
        return Some(a.tac);
    }
    let w = (t_s - a.timestamp) / (b.timestamp - a.timestamp);
    Some(a.tac + w * (b.tac - a.tac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TAC_TAU_S;

    fn uniform(vals: &[f64], dt: f64) -> Vec<TacRecord> {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| TacRecord { timestamp: i as f64 * dt, tac: v })
            .collect()
    }

    #[test]
    fn constant_series_unchanged() {
        let s = uniform(&[0.05; 8], 1800.0);
        let f = filter_tac(&s, TAC_TAU_S);
        for (a, b) in s.iter().zip(&f) {
            assert!((a.tac - b.tac).abs() < 1e-12);
            assert_eq!(a.timestamp, b.timestamp);
        }
    }

    #[test]
    fn impulse_response_is_symmetric() {
        // Zero phase means the smoothed impulse spreads the same energy to
        // both sides of the peak. The series must be long enough for the
        // backward pass's right-edge initialization error ((1-alpha)^k
        // decay) to die out below the tolerance.
        const C: usize = 80;
        let mut vals = vec![0.0; 2 * C + 1];
        vals[C] = 1.0;
        let f = filter_tac(&uniform(&vals, 1800.0), TAC_TAU_S);
        for k in 1..=C {
            assert!(
                (f[C - k].tac - f[C + k].tac).abs() < 1e-9,
                "asymmetry at offset {k}: {} vs {}",
                f[C - k].tac,
                f[C + k].tac
            );
        }
        let before: f64 = f[..C].iter().map(|r| r.tac).sum();
        let after: f64 = f[C + 1..].iter().map(|r| r.tac).sum();
        assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn alternating_series_attenuated() {
        let vals: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = filter_tac(&uniform(&vals, 1800.0), TAC_TAU_S);
        // Skip the edges, where the single-sided passes damp less.
        for r in &f[2..14] {
            assert!(r.tac.abs() < 1.0, "sample not attenuated: {}", r.tac);
        }
    }

    #[test]
    fn short_series_pass_through() {
        let s = uniform(&[0.1, 0.9], 1800.0);
        assert_eq!(filter_tac(&s, TAC_TAU_S), s);
        assert!(filter_tac(&[], TAC_TAU_S).is_empty());
    }

    #[test]
    fn filter_preserves_mean_on_smooth_data() {
        let vals: Vec<f64> = (0..48).map(|i| 0.05 + 0.04 * (i as f64 / 8.0).sin()).collect();
        let s = uniform(&vals, 1800.0);
        let f = filter_tac(&s, TAC_TAU_S);
        let mean = |v: &[TacRecord]| v.iter().map(|r| r.tac).sum::<f64>() / v.len() as f64;
        let (m0, m1) = (mean(&s), mean(&f));
        assert!((m0 - m1).abs() / m0.abs() < 0.01, "mean moved: {m0} -> {m1}");
    }

    #[test]
    fn shift_moves_timestamps_back() {
        let s = uniform(&[0.1, 0.2], 1800.0);
        let shifted = shift_tac(&s, 45.0);
        assert_eq!(shifted[0].timestamp, -2700.0);
        assert_eq!(shifted[1].timestamp, 1800.0 - 2700.0);
        assert_eq!(shifted[0].tac, 0.1);
        let back = shift_tac(&shifted, -45.0);
        assert_eq!(back, s);
        assert!(shift_tac(&[], 45.0).is_empty());
    }

    #[test]
    fn interpolation_is_linear_and_bounded() {
        let s = vec![
            TacRecord { timestamp: 0.0, tac: 0.06 },
            TacRecord { timestamp: 100.0, tac: 0.10 },
        ];
        assert_eq!(interpolate_tac(&s, 50.0), Some(0.08));
        assert_eq!(interpolate_tac(&s, 0.0), Some(0.06));
        assert_eq!(interpolate_tac(&s, 100.0), Some(0.10));
        assert_eq!(interpolate_tac(&s, -1.0), None);
        assert_eq!(interpolate_tac(&s, 101.0), None);
        assert_eq!(interpolate_tac(&[], 0.0), None);
    }
}
