//! ONNX model backend (feature `onnx`).
//!
//! Model contract: one float32 input named `input` of shape 1x150x150x3
//! (NHWC, values in [-1, 1]) and one output named `scores` of shape 1x3
//! holding softmax probabilities in [`MaskLabel`](super::MaskLabel) order.

use std::path::Path;
use std::sync::Arc;

use tract_onnx::prelude::*;

use super::preprocess::{InputTensor, INPUT_CHANNELS, INPUT_SIZE};
use super::{Classification, ClassifierError, MaskClassifier};

pub const INPUT_NAME: &str = "input";
pub const OUTPUT_NAME: &str = "scores";

type Plan = Arc<TypedRunnableModel>;

pub struct OnnxBackend {
    plan: Plan,
    name: String,
}

impl std::fmt::Debug for OnnxBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxBackend").field("name", &self.name).finish()
    }
}

impl OnnxBackend {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        let path = path.as_ref();
        let load = |e: TractError| ClassifierError::Load(format!("{}: {e:#}", path.display()));
        let model = tract_onnx::onnx().model_for_path(path).map_err(load)?;
        let outlet_name = |o: &OutletId| model.outlet_label(*o).unwrap_or(&model.node(o.node).name).to_string();
        let inputs: Vec<String> = model.input_outlets().map_err(load)?.iter().map(outlet_name).collect();
        let outputs: Vec<String> = model.output_outlets().map_err(load)?.iter().map(outlet_name).collect();
        if inputs != [INPUT_NAME] || outputs != [OUTPUT_NAME] {
            return Err(ClassifierError::Load(format!(
                "{}: expected input {INPUT_NAME:?} and output {OUTPUT_NAME:?}, found {inputs:?} -> {outputs:?}",
                path.display()
            )));
        }
        let model =
            model.with_input_fact(0, f32::fact([1, INPUT_SIZE, INPUT_SIZE, INPUT_CHANNELS]).into()).map_err(load)?;
        let plan = model.into_optimized().map_err(load)?.into_runnable().map_err(load)?;
        Ok(Self { plan, name: format!("onnx:{}", path.display()) })
    }

    /// Raw output probabilities for an input tensor.
    pub fn scores(&self, input: &InputTensor) -> Result<[f64; 3], ClassifierError> {
        let infer = |e: TractError| ClassifierError::Inference(format!("{e:#}"));
        let tensor =
            Tensor::from_shape(&[1, INPUT_SIZE, INPUT_SIZE, INPUT_CHANNELS], input.as_slice()).map_err(infer)?;
        let outputs = self.plan.run(tvec!(tensor.into())).map_err(infer)?;
        let view = outputs[0].to_plain_array_view::<f32>().map_err(infer)?;
        if view.len() != 3 {
            return Err(ClassifierError::Inference(format!("expected 3 scores, got shape {:?}", view.shape())));
        }
        let v: Vec<f64> = view.iter().map(|&s| s as f64).collect();
        Ok([v[0], v[1], v[2]])
    }
}

impl MaskClassifier for OnnxBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn classify_tensor(&self, input: &InputTensor) -> Result<Classification, ClassifierError> {
        Classification::from_scores(self.scores(input)?)
    }
}
