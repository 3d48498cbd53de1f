//! Multi-threaded frame pipeline.
//!
//! ```text
//! decode ──(bounded)──> workers: crop, classify, assess, render ──(bounded)──> reorder ──> sink
//! ```
//!
//! One thread pulls frames from the input iterator, a pool of workers
//! processes them independently, and the calling thread restores input order
//! before handing results to the sink. Output is therefore identical for
//! any worker count.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use crossbeam_channel::bounded;

use crate::classifier::{classify, MaskClassifier};
use crate::geometry::CameraCalibration;
use crate::ingest::{crop_face, FaceDetector, Frame, RawDetection};
use crate::render::{annotate, AnnotationStyle};
use crate::violation::{
    assess_frame, ClassifiedDetection, ExcludedPerson, FpsMeter, FrameAssessment, ViolationError, ViolationPolicy,
};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub calibration: CameraCalibration<f64>,
    pub policy: ViolationPolicy<f64>,
    /// `None` skips rendering.
    pub style: Option<AnnotationStyle>,
    pub workers: usize,
    pub queue_depth: usize,
}

impl PipelineConfig {
    pub fn new(calibration: CameraCalibration<f64>, policy: ViolationPolicy<f64>) -> Self {
        Self {
            calibration,
            policy,
            style: Some(AnnotationStyle::default()),
            workers: default_workers(),
            queue_depth: 8,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(usize::from).unwrap_or(1)
}

/// A frame and, unless a detector is configured, its detections.
#[derive(Debug, Clone)]
pub struct FrameInput {
    pub frame: Frame,
    pub detections: Option<Vec<RawDetection>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameFailure {
    pub index: Option<u64>,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub assessment: FrameAssessment<f64>,
    pub annotated: Option<Frame>,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineStats {
    pub frames_ok: u64,
    pub frames_failed: u64,
    /// Completion times of successfully processed frames, in output order.
    pub completions: Vec<Duration>,
}

impl PipelineStats {
    pub fn fps(&self) -> Result<f64, ViolationError> {
        crate::violation::fps_from_timestamps(&self.completions)
    }
}

/// Crops, classifies, assesses and optionally renders one frame.
pub fn process_frame(
    input: FrameInput,
    config: &PipelineConfig,
    backend: &dyn MaskClassifier,
    detector: Option<&dyn FaceDetector>,
) -> Result<FrameOutput, FrameFailure> {
    let index = input.frame.index;
    let fail = |error: String| FrameFailure { index: Some(index), error };
    let detections = match (input.detections, detector) {
        (Some(d), _) => d,
        (None, Some(det)) => det.detect(&input.frame).map_err(|e| fail(e.to_string()))?,
        (None, None) => Vec::new(),
    };
    let mut classified = Vec::with_capacity(detections.len());
    let mut excluded = Vec::new();
    for (i, det) in detections.iter().enumerate() {
        let result = crop_face(&input.frame, &det.bbox)
            .map_err(|e| e.to_string())
            .and_then(|crop| classify(&crop, backend).map_err(|e| e.to_string()));
        match result {
            Ok(classification) => {
                classified.push(ClassifiedDetection { detection_index: i, bbox: det.bbox, classification })
            }
            Err(reason) => excluded.push(ExcludedPerson { detection_index: i, reason }),
        }
    }
    let mut assessment =
        assess_frame(index, &classified, &config.calibration, &config.policy).map_err(|e| fail(e.to_string()))?;
    if !excluded.is_empty() {
        assessment.excluded.extend(excluded);
        assessment.excluded.sort_by_key(|e| e.detection_index);
    }
    let annotated = config.style.as_ref().map(|style| annotate(&input.frame, &assessment, style));
    Ok(FrameOutput { assessment, annotated })
}

/// Runs every input through [`process_frame`] on `config.workers` threads and
/// calls `sink` once per input, in input order.
pub fn run_pipeline<I, S>(
    inputs: I,
    config: &PipelineConfig,
    backend: Arc<dyn MaskClassifier>,
    detector: Option<Arc<dyn FaceDetector>>,
    mut sink: S,
) -> PipelineStats
where
    I: Iterator<Item = Result<FrameInput, FrameFailure>> + Send,
    S: FnMut(Result<FrameOutput, FrameFailure>),
{
    let workers = config.workers.max(1);
    let depth = config.queue_depth.max(1);
    let (in_tx, in_rx) = bounded::<(u64, Result<FrameInput, FrameFailure>)>(depth);
    let (out_tx, out_rx) = bounded::<(u64, Result<FrameOutput, FrameFailure>)>(depth);
    let mut stats = PipelineStats::default();
    let mut meter = FpsMeter::new();

    std::thread::scope(|scope| {
        scope.spawn(move || {
            for (seq, item) in (0u64..).zip(inputs) {
                if in_tx.send((seq, item)).is_err() {
                    break;
                }
            }
        });
        for _ in 0..workers {
            let in_rx = in_rx.clone();
            let out_tx = out_tx.clone();
            let backend = Arc::clone(&backend);
            let detector = detector.clone();
            scope.spawn(move || {
                for (seq, item) in in_rx {
                    let result =
                        item.and_then(|input| process_frame(input, config, backend.as_ref(), detector.as_deref()));
                    if out_tx.send((seq, result)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(in_rx);
        drop(out_tx);

        let mut pending = BTreeMap::new();
        let mut next = 0u64;
        for (seq, result) in out_rx {
            pending.insert(seq, result);
            while let Some(result) = pending.remove(&next) {
                next += 1;
                if result.is_ok() {
                    stats.frames_ok += 1;
                    meter.tick();
                } else {
                    stats.frames_failed += 1;
                }
                sink(result);
            }
        }
    });
    stats.completions = meter.completions().to_vec();
    stats
}
