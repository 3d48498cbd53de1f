//! `run` and `bench`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;

use sentinel_core::classifier::{MaskClassifier, ReferenceBackend};
use sentinel_core::geometry::DEFAULT_FACE_WIDTH_M;
use sentinel_core::ingest::{open_frame_source, BackgroundDetector, FaceDetector, FrameRecord, RawDetection};
use sentinel_core::pipeline::{run_pipeline, FrameFailure, FrameInput, PipelineConfig, PipelineStats};
use sentinel_core::render::{write_run_report, AnnotationStyle};
use sentinel_core::simulator::SyntheticStreamConfig;
use sentinel_core::violation::{compliance_metrics, ConfusionCounts, Metrics};
use sentinel_core::{CameraCalibration, FrameAssessment};

use crate::config::{BackendChoice, DetectionSource, DetectorKind, RunConfig, RunFlags};
use crate::simulate::{frame_file_name, CALIBRATION_DISTANCE_M};
use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunFlags,
    /// Generate this many synthetic frames instead of reading `--frames`.
    #[arg(long)]
    pub synthetic_frames: Option<u64>,
    /// Faces per synthetic frame.
    #[arg(long, default_value_t = 10)]
    pub agents: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

pub fn load_calibration(path: &Path) -> Result<CameraCalibration, CliError> {
    let usage = |msg: String| CliError::Usage(format!("calibration {}: {msg}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| usage(e.to_string()))?;
    let calib: CameraCalibration = serde_json::from_str(&text).map_err(|e| usage(e.to_string()))?;
    calib.validate().map_err(|e| usage(e.to_string()))?;
    Ok(calib)
}

#[cfg(feature = "onnx")]
fn load_onnx(path: &Path) -> Result<Arc<dyn MaskClassifier>, CliError> {
    let backend = sentinel_core::classifier::OnnxBackend::load(path).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Arc::new(backend))
}

#[cfg(not(feature = "onnx"))]
fn load_onnx(_path: &Path) -> Result<Arc<dyn MaskClassifier>, CliError> {
    Err(CliError::Usage("this build has no onnx support; rebuild with --features onnx".into()))
}

/// Everything the pipeline needs besides its inputs.
pub struct Session {
    pub pipeline: PipelineConfig,
    pub backend: Arc<dyn MaskClassifier>,
    pub detector: Option<Arc<dyn FaceDetector>>,
}

impl Session {
    pub fn new(cfg: &RunConfig, calibration: CameraCalibration) -> Result<Self, CliError> {
        let backend: Arc<dyn MaskClassifier> = match &cfg.backend {
            BackendChoice::Reference => Arc::new(ReferenceBackend),
            BackendChoice::Onnx(path) => load_onnx(path)?,
        };
        let detector: Option<Arc<dyn FaceDetector>> = match &cfg.detections {
            Some(DetectionSource::Detector { kind: DetectorKind::Background, background }) => {
                Some(Arc::new(BackgroundDetector::new(*background)))
            }
            _ => None,
        };
        let pipeline = PipelineConfig {
            style: cfg.render.then(AnnotationStyle::default),
            workers: cfg.workers,
            ..PipelineConfig::new(calibration, cfg.policy)
        };
        Ok(Self { pipeline, backend, detector })
    }
}

pub struct RunOutcome {
    pub assessments: Vec<FrameAssessment>,
    pub failures: u64,
    pub stats: PipelineStats,
}

impl RunOutcome {
    pub fn violations(&self) -> usize {
        self.assessments.iter().map(|a| a.violation_pairs.len()).sum()
    }

    pub fn fps(&self) -> f64 {
        self.stats.fps().unwrap_or(0.0)
    }
}

/// Runs the pipeline, writing annotated frames into `frames_out` when given
/// and reporting failed frames on `err`.
pub fn drive<I>(
    inputs: I,
    session: &Session,
    frames_out: Option<&Path>,
    err: &mut dyn Write,
) -> Result<RunOutcome, CliError>
where
    I: Iterator<Item = Result<FrameInput, FrameFailure>> + Send,
{
    let mut assessments = Vec::new();
    let mut failures = 0u64;
    let mut write_error = None;
    let stats =
        run_pipeline(inputs, &session.pipeline, Arc::clone(&session.backend), session.detector.clone(), |r| match r {
            Ok(output) => {
                if let (Some(dir), Some(frame)) = (frames_out, &output.annotated) {
                    if write_error.is_none() {
                        let path = dir.join(frame_file_name(frame.index));
                        write_error = frame.image.write(&path).err();
                    }
                }
                assessments.push(output.assessment);
            }
            Err(f) => {
                failures += 1;
                let index = f.index.map_or_else(|| "?".to_string(), |i| i.to_string());
                let _ = writeln!(err, "frame {index}: {}", f.error);
            }
        });
    if let Some(e) = write_error {
        return Err(CliError::Runtime(e.to_string()));
    }
    Ok(RunOutcome { assessments, failures, stats })
}

fn load_records(path: &Path) -> Result<BTreeMap<u64, FrameRecord>, CliError> {
    Ok(crate::evaluate::load_truth(path)?.into_iter().map(|r| (r.frame, r)).collect())
}

/// Frame inputs read from a directory, with detections looked up by frame index.
fn file_inputs(
    frames: &Path,
    records: Option<Arc<BTreeMap<u64, FrameRecord>>>,
) -> Result<(usize, impl Iterator<Item = Result<FrameInput, FrameFailure>> + Send), CliError> {
    let source = open_frame_source(frames).map_err(|e| CliError::Usage(format!("frames: {e}")))?;
    let count = source.len();
    let inputs = (0u64..).zip(source).map(move |(i, item)| match item {
        Ok(frame) => {
            let detections: Option<Vec<RawDetection>> =
                records.as_ref().map(|r| r.get(&frame.index).map(|rec| rec.detections.clone()).unwrap_or_default());
            Ok(FrameInput { frame, detections })
        }
        Err(e) => Err(FrameFailure { index: Some(i), error: e.to_string() }),
    });
    Ok((count, inputs))
}

fn required<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Usage(format!("missing {what}")))
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Outcome of a file-driven run, before reports are written.
struct FileRun {
    outcome: RunOutcome,
    records: Option<Arc<BTreeMap<u64, FrameRecord>>>,
}

fn run_files(cfg: &RunConfig, frames_out: Option<&Path>, err: &mut dyn Write) -> Result<FileRun, CliError> {
    let frames = required(&cfg.frames, "--frames")?;
    let source = required(&cfg.detections, "a detection source (--detections or --detector)")?;
    let calibration = load_calibration(required(&cfg.calibration, "--calibration")?)?;
    let session = Session::new(cfg, calibration)?;
    let records = match source {
        DetectionSource::Stream(path) => Some(Arc::new(load_records(path)?)),
        DetectionSource::Detector { .. } => None,
    };
    let (frame_count, inputs) = file_inputs(frames, records.clone())?;
    if let Some(dir) = frames_out {
        ensure_dir(dir)?;
    }
    let mut outcome = drive(inputs, &session, frames_out, err)?;
    if let Some(records) = &records {
        let orphans: Vec<u64> = records.keys().copied().filter(|&k| k >= frame_count as u64).collect();
        for k in &orphans {
            let _ = writeln!(err, "frame {k}: detection record has no matching frame");
        }
        outcome.failures += orphans.len() as u64;
    }
    Ok(FileRun { outcome, records })
}

/// Truth records aligned with `assessments`; `None` when the run had no
/// detection stream to score against.
fn truth_for(
    assessments: &[FrameAssessment],
    records: Option<&BTreeMap<u64, FrameRecord>>,
) -> Option<Vec<FrameRecord>> {
    let records = records?;
    Some(
        assessments
            .iter()
            .map(|a| records.get(&a.frame).cloned().unwrap_or_else(|| FrameRecord::empty(a.frame)))
            .collect(),
    )
}

fn write_reports(
    cfg: &RunConfig,
    outcome: &RunOutcome,
    truth: Option<&[FrameRecord]>,
    dir: &Path,
) -> Result<(), CliError> {
    let metrics = match truth {
        Some(truth) => compliance_metrics(&outcome.assessments, truth, cfg.policy.mask_required)
            .map_err(|e| CliError::Runtime(e.to_string()))?,
        None => Metrics::from_counts(ConfusionCounts::default(), 0.0),
    }
    .with_fps(outcome.fps());
    write_run_report(&outcome.assessments, &metrics, cfg.record_fps, dir)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let out_dir = required(&cfg.out, "--out")?.clone();
    let run = run_files(cfg, Some(&out_dir), err)?;
    let outcome = &run.outcome;
    let truth = truth_for(&outcome.assessments, run.records.as_deref());
    write_reports(cfg, outcome, truth.as_deref(), &out_dir)?;
    writeln!(out, "frames={} violations={} fps={:.2}", outcome.assessments.len(), outcome.violations(), outcome.fps())?;
    match outcome.failures {
        0 => Ok(()),
        failed => Err(CliError::FramesFailed { failed }),
    }
}

fn synthetic_config(args: &BenchArgs, frames: u64) -> SyntheticStreamConfig {
    SyntheticStreamConfig { agents: args.agents, frames, seed: args.seed, ..SyntheticStreamConfig::default() }
}

pub fn cmd_bench(
    args: &BenchArgs,
    env_config: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = RunConfig::from_flags(&args.run, env_config)?;
    let frames_out = cfg.out.as_ref().map(|d| d.join("frames"));
    let (outcome, truth) = match args.synthetic_frames {
        Some(frames) => {
            let sim = synthetic_config(args, frames);
            let calibration = match &cfg.calibration {
                Some(path) => load_calibration(path)?,
                None => sim.camera.calibration(DEFAULT_FACE_WIDTH_M, CALIBRATION_DISTANCE_M),
            };
            let session = Session::new(&cfg, calibration)?;
            let use_stream = !matches!(cfg.detections, Some(DetectionSource::Detector { .. }));
            let inputs = sim.stream().map(move |item| {
                let f = item.map_err(|e| FrameFailure { index: None, error: e.to_string() })?;
                Ok(FrameInput { frame: f.frame, detections: use_stream.then_some(f.record.detections) })
            });
            if let Some(dir) = &frames_out {
                ensure_dir(dir)?;
            }
            let outcome = drive(inputs, &session, frames_out.as_deref(), err)?;
            // truth is only needed for the report, and is cheap to regenerate
            let mut by_frame = BTreeMap::new();
            if cfg.out.is_some() && use_stream {
                for a in &outcome.assessments {
                    let record = sim.scene(a.frame).and_then(|s| s.frame_record(a.frame, sim.threshold_m));
                    by_frame.insert(a.frame, record.map_err(|e| CliError::Runtime(e.to_string()))?);
                }
            }
            let truth = truth_for(&outcome.assessments, use_stream.then_some(&by_frame));
            (outcome, truth)
        }
        None => {
            let run = run_files(&cfg, frames_out.as_deref(), err)?;
            let truth = truth_for(&run.outcome.assessments, run.records.as_deref());
            (run.outcome, truth)
        }
    };
    let fps = outcome.stats.fps().map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(dir) = &cfg.out {
        write_reports(&cfg, &outcome, truth.as_deref(), dir)?;
    }
    writeln!(out, "frames={} violations={} fps={fps:.2}", outcome.assessments.len(), outcome.violations())?;
    match outcome.failures {
        0 => Ok(()),
        failed => Err(CliError::FramesFailed { failed }),
    }
}
