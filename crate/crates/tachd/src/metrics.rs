//! Confusion-matrix metrics, ROC curves, and the evaluation report.
//!
//! Class 1 (drunk) is the positive class. "Drunk accuracy" is recall of the
//! positive class, "sober accuracy" recall of the negative class; division
//! by an empty denominator yields 0 by convention.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Binary confusion counts with drunk (label 1) as positive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(labels: &[u8], preds: &[u8]) -> Result<Self> {
        if labels.len() != preds.len() {
            return Err(Error::DimMismatch { left: labels.len(), right: preds.len() });
        }
        let mut m = Self::new();
        for (&y, &p) in labels.iter().zip(preds) {
            m.record(y, p);
        }
        Ok(m)
    }

    pub fn record(&mut self, label: u8, pred: u8) {
        match (label != 0, pred != 0) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Recall of the negative class: tn / (tn + fp).
    pub fn sober_accuracy(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    /// Recall of the positive class (same as [`recall`](Self::recall)).
    pub fn drunk_accuracy(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

/// One operating point of the ROC curve. `threshold` is the minimum score
/// classified positive; the (0,0) endpoint carries a threshold just above
/// the highest observed score so the list stays JSON-representable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

/// ROC curve over a real-valued score (here the drunk-minus-sober cosine
/// margin). Scores are swept from high to low; one point is emitted per
/// distinct score, bracketed by the (0,0) and (1,1) endpoints.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<Vec<RocPoint>> {
    if scores.len() != labels.len() {
        return Err(Error::DimMismatch { left: scores.len(), right: labels.len() });
    }
    let pos = labels.iter().filter(|&&y| y != 0).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::EmptyInput(
            "ROC needs at least one positive and one negative sample".into(),
        ));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidValue(format!("non-finite score {bad}")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0, threshold: scores[order[0]] + 1.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: s,
        });
    }
    Ok(points)
}

/// Latency summary over per-window timings, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatencySummary {
    pub mean_s: f64,
    pub p50_s: f64,
    pub p95_s: f64,
}

impl LatencySummary {
    /// Nearest-rank percentiles over the raw timings.
    pub fn from_timings(timings: &[f64]) -> Result<Self> {
        if timings.is_empty() {
            return Err(Error::EmptyInput("latency summary over zero timings".into()));
        }
        let mut sorted = timings.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let rank = |q: f64| {
            let k = (q * sorted.len() as f64).ceil() as usize;
            sorted[k.clamp(1, sorted.len()) - 1]
        };
        Ok(LatencySummary {
            mean_s: timings.iter().sum::<f64>() / timings.len() as f64,
            p50_s: rank(0.50),
            p95_s: rank(0.95),
        })
    }
}

/// The full evaluation record emitted by train/eval runs. Rates are stored
/// as fractions; the human table scales accuracies by 100 to match the
/// usual presentation.
#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub sober_accuracy: f64,
    pub drunk_accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub roc_points: Vec<RocPoint>,
    pub per_window_latency_s: Option<LatencySummary>,
    pub config_echo: BTreeMap<String, String>,
    pub seed: u64,
}

impl MetricsReport {
    /// Builds a report from per-sample predictions and decision scores.
    /// Metrics are recomputed from a naive recount and cross-checked — a
    /// mismatch is a bug, not an input error.
    pub fn from_predictions(
        labels: &[u8],
        preds: &[u8],
        scores: &[f64],
        config_echo: BTreeMap<String, String>,
        seed: u64,
    ) -> Result<Self> {
        let m = ConfusionMatrix::from_pairs(labels, preds)?;
        let naive_correct =
            labels.iter().zip(preds).filter(|(y, p)| (**y != 0) == (**p != 0)).count() as u64;
        assert_eq!(
            m.tp + m.tn,
            naive_correct,
            "confusion matrix disagrees with naive recount"
        );
        let roc_points = roc_curve(scores, labels).unwrap_or_default();
        Ok(MetricsReport {
            accuracy: m.accuracy(),
            f1: m.f1(),
            precision: m.precision(),
            recall: m.recall(),
            sober_accuracy: m.sober_accuracy(),
            drunk_accuracy: m.drunk_accuracy(),
            confusion: m,
            roc_points,
            per_window_latency_s: None,
            config_echo,
            seed,
        })
    }

    /// Plain-text table with accuracies scaled to points (x100).
    pub fn human_table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: String| {
            out.push_str(&format!("{k:<16} {v}\n"));
        };
        row("accuracy", format!("{:.2}", self.accuracy * 100.0));
        row("sober accuracy", format!("{:.2}", self.sober_accuracy * 100.0));
        row("drunk accuracy", format!("{:.2}", self.drunk_accuracy * 100.0));
        row("precision", format!("{:.3}", self.precision));
        row("recall", format!("{:.3}", self.recall));
        row("f1", format!("{:.3}", self.f1));
        if let Some(lat) = &self.per_window_latency_s {
            row(
                "latency",
                format!(
                    "mean {:.4} s, p50 {:.4} s, p95 {:.4} s",
                    lat.mean_s, lat.p50_s, lat.p95_s
                ),
            );
        }
        out
    }

    /// Two-column `fpr tpr` text for external plotting.
    pub fn roc_text(&self) -> String {
        let mut out = String::new();
        for p in &self.roc_points {
            out.push_str(&format!("{:.6} {:.6}\n", p.fpr, p.tpr));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_counts_and_rates() {
        let labels = [1, 1, 1, 0, 0, 0, 0, 1];
        let preds = [1, 1, 0, 0, 0, 1, 0, 0];
        let m = ConfusionMatrix::from_pairs(&labels, &preds).unwrap();
        assert_eq!((m.tp, m.fp, m.tn, m.fn_), (2, 1, 3, 2));
        assert_eq!(m.total(), 8);
        assert!((m.accuracy() - 5.0 / 8.0).abs() < 1e-15);
        assert!((m.precision() - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall() - 0.5).abs() < 1e-15);
        assert!((m.sober_accuracy() - 0.75).abs() < 1e-15);
        assert_eq!(m.drunk_accuracy(), m.recall());
        let f1 = 2.0 * (2.0 / 3.0) * 0.5 / (2.0 / 3.0 + 0.5);
        assert!((m.f1() - f1).abs() < 1e-15);
    }

    #[test]
    fn degenerate_rates_are_zero() {
        let m = ConfusionMatrix::new();
        assert_eq!(m.accuracy(), 0.0);
        assert_eq!(m.precision(), 0.0);
        assert_eq!(m.recall(), 0.0);
        assert_eq!(m.f1(), 0.0);
        // All-negative predictions on all-negative labels: precision 0/0.
        let m = ConfusionMatrix::from_pairs(&[0, 0], &[0, 0]).unwrap();
        assert_eq!(m.precision(), 0.0);
        assert_eq!(m.f1(), 0.0);
        assert_eq!(m.accuracy(), 1.0);
    }

    #[test]
    fn roc_hand_computed() {
        let scores = [0.9, 0.8, 0.3, 0.1];
        let labels = [1, 0, 1, 0];
        let pts = roc_curve(&scores, &labels).unwrap();
        let want = [
            (0.0, 0.0, 1.9),
            (0.0, 0.5, 0.9),
            (0.5, 0.5, 0.8),
            (0.5, 1.0, 0.3),
            (1.0, 1.0, 0.1),
        ];
        assert_eq!(pts.len(), want.len());
        for (p, (fpr, tpr, thr)) in pts.iter().zip(want) {
            assert_eq!((p.fpr, p.tpr, p.threshold), (fpr, tpr, thr));
        }
    }

    #[test]
    fn roc_ties_and_endpoints() {
        let pts = roc_curve(&[0.5, 0.5], &[1, 0]).unwrap();
        assert_eq!(pts.first().unwrap().fpr, 0.0);
        assert_eq!(pts.first().unwrap().tpr, 0.0);
        assert_eq!(pts.last().unwrap().fpr, 1.0);
        assert_eq!(pts.last().unwrap().tpr, 1.0);
        assert_eq!(pts.len(), 2);

        // Monotone non-decreasing tpr along the curve.
        let scores: Vec<f64> = (0..50).map(|i| ((i * 37) % 50) as f64 / 50.0).collect();
        let labels: Vec<u8> = (0..50).map(|i| (i % 3 == 0) as u8).collect();
        let pts = roc_curve(&scores, &labels).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].tpr >= w[0].tpr);
            assert!(w[1].fpr >= w[0].fpr);
        }
    }

    #[test]
    fn roc_rejects_single_class() {
        assert!(roc_curve(&[0.1, 0.2], &[1, 1]).is_err());
        assert!(roc_curve(&[0.1, 0.2], &[0, 0]).is_err());
        assert!(roc_curve(&[f64::NAN, 0.2], &[0, 1]).is_err());
    }

    #[test]
    fn latency_percentiles() {
        let t: Vec<f64> = (1..=100).map(|i| i as f64 / 1000.0).collect();
        let lat = LatencySummary::from_timings(&t).unwrap();
        assert!((lat.mean_s - 0.0505).abs() < 1e-12);
        assert_eq!(lat.p50_s, 0.050);
        assert_eq!(lat.p95_s, 0.095);
        let single = LatencySummary::from_timings(&[0.25]).unwrap();
        assert_eq!(single.mean_s, single.p50_s);
        assert_eq!(single.p50_s, single.p95_s);
        assert!(LatencySummary::from_timings(&[]).is_err());
    }

    #[test]
    fn report_builds_and_serializes() {
        let labels = [1, 0, 1, 0];
        let preds = [1, 0, 0, 0];
        let scores = [0.9, -0.5, -0.1, -0.7];
        let mut echo = BTreeMap::new();
        echo.insert("model.kind".to_string(), "refine".to_string());
        let rep = MetricsReport::from_predictions(&labels, &preds, &scores, echo, 42).unwrap();
        assert!((rep.accuracy - 0.75).abs() < 1e-15);
        assert_eq!(rep.roc_points.len(), 5);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"accuracy\":0.75"));
        assert!(json.contains("\"seed\":42"));
        let table = rep.human_table();
        assert!(table.contains("accuracy"));
        assert!(table.contains("75.00"));
        assert_eq!(rep.roc_text().lines().count(), 5);
    }
}
