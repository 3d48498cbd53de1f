//! Spatial soft-attention pooling over a CNN feature map.
//!
//! A single attention logit per spatial cell is softmax-normalized over the
//! whole grid; the pooled descriptor is the weight-averaged channel vector.

use super::ClassifierError;
use crate::scalar::Scalar;

/// Spatial size of the extractor output for a 150x150 input.
pub const EXTRACTOR_GRID: usize = 3;
/// Channel depth of the extractor output.
pub const EXTRACTOR_CHANNELS: usize = 2048;

/// `height x width x channels` activations, stored HWC.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self, ClassifierError> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(ClassifierError::Shape(format!(
                "feature map dims must be >= 1, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(ClassifierError::Shape(format!(
                "{height}x{width}x{channels} feature map needs {} values, got {}",
                height * width * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::Shape("feature map contains non-finite values".into()));
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn cells(&self) -> usize {
        self.height * self.width
    }

    /// Channel vector at spatial cell `cell = row * width + col`.
    pub fn cell(&self, cell: usize) -> &[T] {
        &self.data[cell * self.channels..(cell + 1) * self.channels]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

/// Numerically stable softmax over all logits.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum = exps.iter().copied().fold(T::zero(), |a, b| a + b);
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax weights over the `height * width` attention logits, row-major.
pub fn attention_weights<T: Scalar>(features: &FeatureMap<T>, logits: &[T]) -> Result<Vec<T>, ClassifierError> {
    if logits.len() != features.cells() {
        return Err(ClassifierError::Shape(format!(
            "{} attention logits for a {}x{} grid",
            logits.len(),
            features.height,
            features.width
        )));
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(ClassifierError::Shape("attention logits must be finite".into()));
    }
    Ok(softmax(logits))
}

/// `out_c = sum_{cells} softmax(logits)_cell * features_{cell, c}`.
pub fn attention_pool<T: Scalar>(features: &FeatureMap<T>, logits: &[T]) -> Result<Vec<T>, ClassifierError> {
    let weights = attention_weights(features, logits)?;
    let mut out = vec![T::zero(); features.channels];
    for (cell, &w) in weights.iter().enumerate() {
        for (acc, &v) in out.iter_mut().zip(features.cell(cell)) {
            *acc = *acc + w * v;
        }
    }
    Ok(out)
}
