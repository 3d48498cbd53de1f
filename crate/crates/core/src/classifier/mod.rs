//! Mask classification of face crops.
//!
//! Crops are resized to the 150x150 network input, then handed to a
//! [`MaskClassifier`] backend. Two backends exist: [`ReferenceBackend`], a
//! deterministic hand-written rule used throughout the test suite, and (with
//! the `onnx` feature) an ONNX model runner.

mod attention;
#[cfg(feature = "onnx")]
mod onnx;
mod preprocess;
mod reference;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use attention::{attention_pool, attention_weights, softmax, FeatureMap, EXTRACTOR_CHANNELS, EXTRACTOR_GRID};
#[cfg(feature = "onnx")]
pub use onnx::{OnnxBackend, INPUT_NAME as ONNX_INPUT_NAME, OUTPUT_NAME as ONNX_OUTPUT_NAME};
pub use preprocess::{preprocess, InputTensor, INPUT_CHANNELS, INPUT_LEN, INPUT_SIZE};
pub use reference::{ReferenceBackend, REFERENCE_RULE_VERSION};

use crate::ingest::RgbImage;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("empty crop")]
    EmptyCrop,
    #[error("invalid scores {scores:?}: {reason}")]
    InvalidScores { scores: [f64; 3], reason: String },
    #[error("failed to load backend: {0}")]
    Load(String),
    #[error("inference failed: {0}")]
    Inference(String),
}

/// The three mask-wearing classes, in score order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskLabel {
    WithMask,
    WithoutMask,
    WornIncorrectly,
}

impl MaskLabel {
    pub const ALL: [MaskLabel; 3] = [MaskLabel::WithMask, MaskLabel::WithoutMask, MaskLabel::WornIncorrectly];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MaskLabel::WithMask => "with_mask",
            MaskLabel::WithoutMask => "without_mask",
            MaskLabel::WornIncorrectly => "worn_incorrectly",
        }
    }

    /// Overlay caption drawn above a box.
    pub fn caption(self) -> &'static str {
        match self {
            MaskLabel::WithMask => "MASK",
            MaskLabel::WithoutMask => "NO MASK",
            MaskLabel::WornIncorrectly => "INCORRECT",
        }
    }
}

impl fmt::Display for MaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaskLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MaskLabel::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| format!("unknown mask label {s:?}"))
    }
}

/// Class probabilities and the winning label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: MaskLabel,
    pub scores: [f64; 3],
}

impl Classification {
    /// Validates a probability vector and picks its argmax. Ties go to the
    /// class declared first in [`MaskLabel`].
    pub fn from_scores(scores: [f64; 3]) -> Result<Self, ClassifierError> {
        let invalid = |reason: &str| ClassifierError::InvalidScores { scores, reason: reason.into() };
        if scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(invalid("each score must lie in [0, 1]"));
        }
        if (scores.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(invalid("scores must sum to 1"));
        }
        let mut best = 0;
        for i in 1..3 {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        Ok(Self { label: MaskLabel::ALL[best], scores })
    }

    pub fn is_masked(&self) -> bool {
        self.label == MaskLabel::WithMask
    }
}

/// A loaded classification model. Implementations are immutable after
/// construction and may be shared across worker threads.
pub trait MaskClassifier: Send + Sync {
    fn name(&self) -> &str;

    fn classify_tensor(&self, input: &InputTensor) -> Result<Classification, ClassifierError>;
}

/// Preprocesses a face crop and runs it through `backend`.
pub fn classify(crop: &RgbImage, backend: &dyn MaskClassifier) -> Result<Classification, ClassifierError> {
    let input = preprocess(crop)?;
    backend.classify_tensor(&input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_and_ties() {
        let c = Classification::from_scores([0.2, 0.5, 0.3]).unwrap();
        assert_eq!(c.label, MaskLabel::WithoutMask);
        let c = Classification::from_scores([0.25, 0.375, 0.375]).unwrap();
        assert_eq!(c.label, MaskLabel::WithoutMask);
        let c = Classification::from_scores([0.5, 0.0, 0.5]).unwrap();
        assert_eq!(c.label, MaskLabel::WithMask);
    }

    #[test]
    fn rejects_non_distributions() {
        assert!(Classification::from_scores([0.5, 0.5, 0.5]).is_err());
        assert!(Classification::from_scores([1.2, -0.1, -0.1]).is_err());
        assert!(Classification::from_scores([f64::NAN, 0.5, 0.5]).is_err());
    }

    #[test]
    fn label_names_roundtrip() {
        for l in MaskLabel::ALL {
            assert_eq!(l.as_str().parse::<MaskLabel>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{l}\""));
        }
        assert!("mask".parse::<MaskLabel>().is_err());
    }
}
