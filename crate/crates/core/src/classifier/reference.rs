//! Deterministic stand-in for a trained model.
//!
//! This backend is a test double. It makes no claim about real mask
//! detection; it exists so the whole pipeline can run, and be checked
//! byte-for-byte, without model weights. It understands the flat-shaded
//! faces the simulator draws: skin on top, and a blue mask over the middle
//! and/or bottom third of the box.
//!
//! Rule, version 1:
//! 1. Average the input tensor over a 3x3 grid of 50x50 blocks, giving a
//!    3x3x3 feature map.
//! 2. Attention-pool that map twice: once with logits peaked on the bottom
//!    row (mouth) and once peaked on the middle row (nose).
//! 3. Blueness `b - r` of each pooled color gives `s_mouth`, `s_nose`.
//! 4. Class logits: with_mask = `G (s_mouth + s_nose)`,
//!    without_mask = `-G (s_mouth + s_nose)`,
//!    worn_incorrectly = `G (s_mouth - s_nose)`, with `G = 3`; softmax.
//!
//! An all-black crop therefore scores exactly `[1/3, 1/3, 1/3]` and resolves
//! to `with_mask` through the tie rule.

use super::attention::{attention_pool, softmax, FeatureMap};
use super::preprocess::{InputTensor, INPUT_SIZE};
use super::{Classification, ClassifierError, MaskClassifier};

pub const REFERENCE_RULE_VERSION: u32 = 1;

const GRID: usize = 3;
const BLOCK: usize = INPUT_SIZE / GRID;
const GAIN: f64 = 3.0;
const FOCUS: f64 = 4.0;

#[rustfmt::skip]
const MOUTH_LOGITS: [f64; 9] = [
    -FOCUS, -FOCUS, -FOCUS,
    -FOCUS, -FOCUS, -FOCUS,
     FOCUS,  FOCUS,  FOCUS,
];
#[rustfmt::skip]
const NOSE_LOGITS: [f64; 9] = [
    -FOCUS, -FOCUS, -FOCUS,
     FOCUS,  FOCUS,  FOCUS,
    -FOCUS, -FOCUS, -FOCUS,
];

#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceBackend;

impl ReferenceBackend {
    pub fn new() -> Self {
        Self
    }

    fn block_features(input: &InputTensor) -> FeatureMap<f64> {
        let mut data = vec![0.0f64; GRID * GRID * 3];
        for row in 0..INPUT_SIZE {
            let gr = row / BLOCK;
            for col in 0..INPUT_SIZE {
                let gc = col / BLOCK;
                let base = (gr * GRID + gc) * 3;
                for c in 0..3 {
                    data[base + c] += input.at(row, col, c) as f64;
                }
            }
        }
        let n = (BLOCK * BLOCK) as f64;
        data.iter_mut().for_each(|v| *v /= n);
        FeatureMap::new(GRID, GRID, 3, data).expect("3x3x3 block map")
    }
}

impl MaskClassifier for ReferenceBackend {
    fn name(&self) -> &str {
        "reference"
    }

    fn classify_tensor(&self, input: &InputTensor) -> Result<Classification, ClassifierError> {
        let features = Self::block_features(input);
        let mouth = attention_pool(&features, &MOUTH_LOGITS)?;
        let nose = attention_pool(&features, &NOSE_LOGITS)?;
        let s_mouth = mouth[2] - mouth[0];
        let s_nose = nose[2] - nose[0];
        let logits = [GAIN * (s_mouth + s_nose), -GAIN * (s_mouth + s_nose), GAIN * (s_mouth - s_nose)];
        let p = softmax(&logits);
        Classification::from_scores([p[0], p[1], p[2]])
    }
}
