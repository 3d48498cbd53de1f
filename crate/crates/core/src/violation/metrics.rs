use serde::{Deserialize, Serialize};

use super::{BoxColor, FrameAssessment, ViolationError};
use crate::classifier::MaskLabel;
use crate::ingest::{FrameRecord, RawDetection};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.true_positives += 1,
            (true, false) => self.false_positives += 1,
            (false, true) => self.false_negatives += 1,
            (false, false) => self.true_negatives += 1,
        }
    }
}

/// Detection-quality summary. Ratios with a zero denominator are reported as
/// 0 and raise `degenerate_denominators`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fps: f64,
    pub degenerate_denominators: bool,
}

impl Metrics {
    pub fn from_counts(counts: ConfusionCounts, fps: f64) -> Self {
        let mut degenerate = false;
        let mut ratio = |num: u64, den: u64| {
            if den == 0 {
                degenerate = true;
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let tp = counts.true_positives;
        let precision = ratio(tp, tp + counts.false_positives);
        let recall = ratio(tp, tp + counts.false_negatives);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            degenerate = true;
            0.0
        };
        Self { counts, precision, recall, f1, fps, degenerate_denominators: degenerate }
    }

    pub fn with_fps(mut self, fps: f64) -> Self {
        self.fps = fps;
        self
    }
}

/// Whether ground truth says this person should be boxed in red.
pub fn truth_flagged(det: &RawDetection, mask_required: bool) -> bool {
    det.truth_violation.unwrap_or(false) || (mask_required && det.truth_label.is_some_and(|l| l != MaskLabel::WithMask))
}

/// Per-person, per-frame confusion of "boxed red" against ground truth.
///
/// Only detections carrying a truth annotation are scored. A detection that
/// was excluded from assessment counts as not flagged.
pub fn compliance_metrics<T: Scalar>(
    predicted: &[FrameAssessment<T>],
    truth: &[FrameRecord],
    mask_required: bool,
) -> Result<Metrics, ViolationError> {
    if predicted.len() != truth.len() {
        return Err(ViolationError::Alignment(format!(
            "{} predicted frames vs {} truth frames",
            predicted.len(),
            truth.len()
        )));
    }
    let mut counts = ConfusionCounts::default();
    for (pred, record) in predicted.iter().zip(truth) {
        if pred.frame != record.frame {
            return Err(ViolationError::Alignment(format!(
                "predicted frame {} vs truth frame {}",
                pred.frame, record.frame
            )));
        }
        if let Some(p) = pred.persons.iter().find(|p| p.detection_index >= record.detections.len()) {
            return Err(ViolationError::Alignment(format!(
                "frame {}: detection {} not in truth ({} detections)",
                pred.frame,
                p.detection_index,
                record.detections.len()
            )));
        }
        for (i, det) in record.detections.iter().enumerate() {
            if !det.has_truth() {
                continue;
            }
            let flagged = pred.person(i).is_some_and(|p| p.box_color == BoxColor::Red);
            counts.record(flagged, truth_flagged(det, mask_required));
        }
    }
    Ok(Metrics::from_counts(counts, 0.0))
}
