#![cfg(feature = "onnx")]

use std::path::PathBuf;

use sentinel_core::classifier::{classify, InputTensor, MaskClassifier, MaskLabel, OnnxBackend, INPUT_LEN};
use sentinel_core::ingest::RgbImage;

const W: [[f64; 3]; 3] = [[4.0, -2.0, 0.5], [-1.0, 3.0, 0.0], [0.5, -1.5, 2.0]];
const B: [f64; 3] = [0.1, -0.2, 0.05];

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny_classifier.onnx")
}

fn expected(input: &InputTensor) -> [f64; 3] {
    let mut means = [0.0f64; 3];
    for (i, v) in input.as_slice().iter().enumerate() {
        means[i % 3] += *v as f64;
    }
    let n = (INPUT_LEN / 3) as f64;
    let logits: Vec<f64> = (0..3).map(|j| (0..3).map(|c| means[c] / n * W[c][j]).sum::<f64>() + B[j]).collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    [exp[0] / sum, exp[1] / sum, exp[2] / sum]
}

#[test]
fn matches_hand_computed_scores() {
    let backend = OnnxBackend::load(fixture()).unwrap();
    for k in 0..4u32 {
        let values: Vec<f32> = (0..INPUT_LEN as u32).map(|i| (((i * 7 + k * 13) % 255) as f32 / 127.5) - 1.0).collect();
        let input = InputTensor::from_vec(values).unwrap();
        let got = backend.scores(&input).unwrap();
        let want = expected(&input);
        for c in 0..3 {
            assert!((got[c] - want[c]).abs() < 1e-5, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn channel_dominance_selects_label() {
    let backend = OnnxBackend::load(fixture()).unwrap();
    let red = RgbImage::filled(40, 48, [255, 0, 0]);
    assert_eq!(classify(&red, &backend).unwrap().label, MaskLabel::WithMask);
    let green = RgbImage::filled(40, 48, [0, 255, 0]);
    assert_eq!(classify(&green, &backend).unwrap().label, MaskLabel::WithoutMask);
    assert!(backend.name().contains("tiny_classifier"));
}

#[test]
fn missing_model_is_load_error() {
    let err = OnnxBackend::load("/nonexistent/model.onnx").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/model.onnx"));
}

/// Parity record written alongside a trained model: each case holds a
/// preprocessed input tensor and the scores the training framework produced.
#[derive(serde::Deserialize)]
struct ParityRecord {
    cases: Vec<ParityCase>,
}

#[derive(serde::Deserialize)]
struct ParityCase {
    input: Vec<f32>,
    scores: [f64; 3],
}

/// Runs only when `SENTINEL_ONNX_MODEL` and `SENTINEL_ONNX_PARITY` point at a
/// trained model and its parity record.
#[test]
fn trained_model_matches_parity_record() {
    let (Some(model), Some(record)) =
        (std::env::var_os("SENTINEL_ONNX_MODEL"), std::env::var_os("SENTINEL_ONNX_PARITY"))
    else {
        eprintln!("no trained model configured; skipping parity check");
        return;
    };
    let backend = OnnxBackend::load(&model).unwrap();
    let record: ParityRecord = serde_json::from_slice(&std::fs::read(&record).unwrap()).unwrap();
    assert!(!record.cases.is_empty());
    let mut worst = 0.0f64;
    for case in record.cases {
        let got = backend.scores(&InputTensor::from_vec(case.input).unwrap()).unwrap();
        for (g, w) in got.iter().zip(case.scores) {
            worst = worst.max((g - w).abs());
        }
    }
    assert!(worst <= 1e-4, "max abs diff {worst:e}");
}
