//! Confusion matrices, threshold metrics, ROC and precision-recall curves.
//!
//! The positive class is label 1 (cancelled deal) throughout. Metrics whose
//! denominator is zero are `None` and serialize as JSON `null`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{labels} labels but {scores} scores")]
    LengthMismatch { labels: usize, scores: usize },
    #[error("EmptyInput: no samples")]
    EmptyInput,
    #[error("SingleClass: ROC needs both classes")]
    SingleClass,
    #[error("NoPositives: PR curve needs at least one positive")]
    NoPositives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check_lengths(labels: &[u8], scores: &[f64]) -> Result<(), MetricsError> {
    if labels.len() != scores.len() {
        return Err(MetricsError::LengthMismatch { labels: labels.len(), scores: scores.len() });
    }
    Ok(())
}

/// Counts outcomes with `score >= threshold` predicted positive.
pub fn confusion_at(labels: &[u8], scores: &[f64], threshold: f64) -> Result<ConfusionMatrix, MetricsError> {
    check_lengths(labels, scores)?;
    let mut cm = ConfusionMatrix::default();
    for (&l, &s) in labels.iter().zip(scores) {
        match (s >= threshold, l == 1) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMetrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Accuracy over `TP + FP + TN + FN`; precision, recall and their harmonic mean.
pub fn scalar_metrics(cm: &ConfusionMatrix) -> Result<ScalarMetrics, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    Ok(ScalarMetrics { accuracy: (cm.tp + cm.tn) as f64 / total as f64, precision, recall, f1 })
}

/// Groups samples by distinct score, highest first, returning cumulative
/// (tp, fp) counts after each group.
fn cumulative_counts(labels: &[u8], scores: &[f64]) -> (Vec<(usize, usize)>, Vec<f64>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut counts = Vec::new();
    let mut thresholds = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        counts.push((tp, fp));
        thresholds.push(s);
    }
    (counts, thresholds)
}

/// ROC points `(fpr, tpr)` from `(0, 0)` to `(1, 1)` over all distinct
/// score thresholds, and the trapezoidal area under them.
pub fn roc_curve(labels: &[u8], scores: &[f64]) -> Result<(Vec<(f64, f64)>, f64), MetricsError> {
    check_lengths(labels, scores)?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let (counts, _) = cumulative_counts(labels, scores);
    let mut points = Vec::with_capacity(counts.len() + 1);
    points.push((0.0, 0.0));
    points.extend(counts.iter().map(|&(tp, fp)| (fp as f64 / neg as f64, tp as f64 / pos as f64)));
    let area = points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
    Ok((points, area))
}

/// How the area under the PR curve is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrArea {
    /// Right-continuous steps: `sum (r_k - r_{k-1}) p_k` with `r_0 = 0`.
    #[default]
    Step,
    /// Trapezoids between consecutive points, starting from `(0, p_1)`.
    Trapezoidal,
}

/// PR points `(recall, precision)`, one per distinct score threshold, and
/// the area under them.
pub fn pr_curve(labels: &[u8], scores: &[f64], area: PrArea) -> Result<(Vec<(f64, f64)>, f64), MetricsError> {
    check_lengths(labels, scores)?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 {
        return Err(MetricsError::NoPositives);
    }
    let (counts, _) = cumulative_counts(labels, scores);
    let points: Vec<(f64, f64)> = counts
        .iter()
        .map(|&(tp, fp)| (tp as f64 / pos as f64, tp as f64 / (tp + fp) as f64))
        .collect();
    let mut prev = (0.0, points[0].1);
    let mut total = 0.0;
    for &(r, p) in &points {
        total += match area {
            PrArea::Step => (r - prev.0) * p,
            PrArea::Trapezoidal => (r - prev.0) * (p + prev.1) / 2.0,
        };
        prev = (r, p);
    }
    Ok((points, total))
}

/// Everything reported for one set of predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub n: usize,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub auroc: Option<f64>,
    pub aupr: Option<f64>,
    pub roc_points: Vec<(f64, f64)>,
    pub pr_points: Vec<(f64, f64)>,
}

/// Builds a full report. Curves that are undefined for the label mix (no
/// positives, single class) are left empty with `None` areas.
pub fn evaluate(labels: &[u8], scores: &[f64], threshold: f64, area: PrArea) -> Result<EvalReport, MetricsError> {
    let confusion = confusion_at(labels, scores, threshold)?;
    let m = scalar_metrics(&confusion)?;
    let (roc_points, auroc) = match roc_curve(labels, scores) {
        Ok((p, a)) => (p, Some(a)),
        Err(_) => (Vec::new(), None),
    };
    let (pr_points, aupr) = match pr_curve(labels, scores, area) {
        Ok((p, a)) => (p, Some(a)),
        Err(_) => (Vec::new(), None),
    };
    Ok(EvalReport {
        threshold,
        n: labels.len(),
        confusion,
        accuracy: m.accuracy,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        auroc,
        aupr,
        roc_points,
        pr_points,
    })
}

/// Writes curve points as a two-column CSV with the given header names.
pub fn write_curve_csv<W: Write>(out: W, columns: (&str, &str), points: &[(f64, f64)]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([columns.0, columns.1])?;
    for (a, b) in points {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()
}
