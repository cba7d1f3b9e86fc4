//! Confusion counts and the accuracy / precision / recall / F1 report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{Model, NnError, Samples};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{probs} probabilities but {labels} labels")]
    LengthMismatch { probs: usize, labels: usize },
    #[error("no samples to score")]
    Empty,
    #[error(transparent)]
    Model(#[from] NnError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Metrics whose denominator was zero; they are reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degenerate {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl Degenerate {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
    pub threshold: f64,
    pub degenerate: Degenerate,
}

/// Positive iff `prob >= threshold`.
pub fn confusion(probs: &[f32], labels: &[u8], threshold: f64) -> Result<ConfusionCounts, MetricsError> {
    if probs.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            probs: probs.len(),
            labels: labels.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &y) in probs.iter().zip(labels) {
        match (f64::from(p) >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `2·p·r / (p + r)`, or `None` when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn scores(counts: ConfusionCounts, threshold: f64) -> Result<MetricsReport, MetricsError> {
    let total = counts.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let accuracy = (counts.tp + counts.tn) as f64 / total as f64;
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => f1_score(p, r),
        _ => None,
    };
    Ok(MetricsReport {
        accuracy,
        precision: precision.unwrap_or(0.0),
        recall: recall.unwrap_or(0.0),
        f1: f1.unwrap_or(0.0),
        counts,
        threshold,
        degenerate: Degenerate {
            precision: precision.is_none(),
            recall: recall.is_none(),
            f1: f1.is_none(),
        },
    })
}

pub fn evaluate(model: &Model, samples: Samples<'_>, threshold: f64) -> Result<MetricsReport, MetricsError> {
    let probs = model.forward(samples.features, samples.dim)?;
    scores(confusion(&probs, samples.labels, threshold)?, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_model, LayerSpec, Activation, ParamVector};

    #[test]
    fn confusion_basic_and_tie() {
        let c = confusion(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 0, tn: 1, fn_: 0 });
        let c = confusion(&[0.5], &[0], 0.5).unwrap();
        assert_eq!(c.fp, 1);
        assert!(confusion(&[0.5], &[0, 1], 0.5).is_err());
    }

    #[test]
    fn hand_computed_scores() {
        let r = scores(ConfusionCounts { tp: 3, fp: 1, tn: 5, fn_: 1 }, 0.5).unwrap();
        assert!((r.accuracy - 0.8).abs() < 1e-12);
        assert!((r.precision - 0.75).abs() < 1e-12);
        assert!((r.recall - 0.75).abs() < 1e-12);
        assert!((r.f1 - 0.75).abs() < 1e-12);
        assert!(!r.degenerate.any());
    }

    #[test]
    fn no_positives_is_degenerate_not_nan() {
        let r = scores(ConfusionCounts { tp: 0, fp: 0, tn: 10, fn_: 0 }, 0.5).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert!(r.degenerate.precision && r.degenerate.recall && r.degenerate.f1);
    }

    #[test]
    fn empty_counts_error() {
        assert_eq!(scores(ConfusionCounts::default(), 0.5), Err(MetricsError::Empty));
    }

    #[test]
    fn f1_from_reported_precision_recall() {
        let f1 = f1_score(98.09, 97.18).unwrap();
        assert!((f1 - 97.63).abs() <= 0.01);
        assert_eq!(f1_score(0.0, 0.0), None);
    }

    #[test]
    fn zero_model_on_balanced_labels() {
        let specs = [LayerSpec::new(2, 1, Activation::Sigmoid)];
        let mut m = init_model(&specs, 0).unwrap();
        m.set_params(&ParamVector::new(vec![0.0; 3], m.layout_digest())).unwrap();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let y = [1, 0, 1, 0];
        let r = evaluate(&m, Samples::new(&x, &y, 2), 0.5).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.counts.tp + r.counts.fp, 4);
        let again = evaluate(&m.clone(), Samples::new(&x, &y, 2), 0.5).unwrap();
        assert_eq!(r, again);
    }
}
