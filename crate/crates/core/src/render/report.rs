//! Run report files.
//!
//! - `violations.jsonl`: one `{"frame", "pair", "distance_m"}` event per violating pair.
//! - `assessments.jsonl`: the full per-person assessment of every frame.
//! - `summary.json`: frame and violation totals plus precision/recall/F1/FPS.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::violation::{FrameAssessment, Metrics};

#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct ReportError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub frames: u64,
    pub violations: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Wall-clock throughput; `null` when the run did not record timing,
    /// which keeps reports byte-reproducible.
    pub fps: Option<f64>,
    pub degenerate_denominators: bool,
}

impl RunSummary {
    pub fn new(assessments: &[FrameAssessment<f64>], metrics: &Metrics, record_fps: bool) -> Self {
        Self {
            frames: assessments.len() as u64,
            violations: assessments.iter().map(|a| a.violation_pairs.len() as u64).sum(),
            precision: metrics.precision,
            recall: metrics.recall,
            f1: metrics.f1,
            fps: record_fps.then_some(metrics.fps),
            degenerate_denominators: metrics.degenerate_denominators,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub violations: PathBuf,
    pub assessments: PathBuf,
    pub summary: PathBuf,
}

impl ReportPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            violations: dir.join("violations.jsonl"),
            assessments: dir.join("assessments.jsonl"),
            summary: dir.join("summary.json"),
        }
    }
}

#[derive(Serialize)]
struct ViolationEvent {
    frame: u64,
    pair: [usize; 2],
    distance_m: f64,
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), ReportError> {
    let wrap = |source| ReportError { path: path.to_path_buf(), source };
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    body(&mut out).map_err(wrap)?;
    out.flush().map_err(wrap)
}

/// Writes the three report files into `dir`, which must exist.
pub fn write_run_report(
    assessments: &[FrameAssessment<f64>],
    metrics: &Metrics,
    record_fps: bool,
    dir: &Path,
) -> Result<ReportPaths, ReportError> {
    let paths = ReportPaths::in_dir(dir);
    write_file(&paths.violations, |out| {
        for a in assessments {
            for v in &a.violation_pairs {
                let event = ViolationEvent { frame: a.frame, pair: v.pair, distance_m: v.distance_m };
                writeln!(out, "{}", serde_json::to_string(&event)?)?;
            }
        }
        Ok(())
    })?;
    write_file(&paths.assessments, |out| {
        for a in assessments {
            writeln!(out, "{}", serde_json::to_string(a)?)?;
        }
        Ok(())
    })?;
    let summary = RunSummary::new(assessments, metrics, record_fps);
    write_file(&paths.summary, |out| {
        serde_json::to_writer_pretty(&mut *out, &summary)?;
        writeln!(out)
    })?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::violation::{ConfusionCounts, ViolationPair};

    #[test]
    fn empty_run_summary() {
        let dir = tempfile::tempdir().unwrap();
        let metrics = Metrics::from_counts(ConfusionCounts::default(), 0.0);
        let paths = write_run_report(&[], &metrics, false, dir.path()).unwrap();
        let summary: RunSummary = serde_json::from_slice(&std::fs::read(&paths.summary).unwrap()).unwrap();
        assert_eq!(summary.frames, 0);
        assert_eq!(summary.violations, 0);
        assert!(summary.degenerate_denominators);
        assert_eq!(summary.fps, None);
        assert!(std::fs::read(&paths.violations).unwrap().is_empty());
    }

    #[test]
    fn summary_key_order_and_events() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = FrameAssessment::empty(7);
        a.violation_pairs.push(ViolationPair { pair: [0, 2], distance_m: 1.25 });
        let metrics = Metrics::from_counts(ConfusionCounts { true_positives: 1, ..Default::default() }, 30.5);
        let paths = write_run_report(&[a], &metrics, true, dir.path()).unwrap();
        let text = std::fs::read_to_string(&paths.summary).unwrap();
        let keys = ["frames", "violations", "precision", "recall", "f1", "fps", "degenerate_denominators"];
        let positions: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"fps\": 30.5"));
        assert_eq!(
            std::fs::read_to_string(&paths.violations).unwrap(),
            "{\"frame\":7,\"pair\":[0,2],\"distance_m\":1.25}\n"
        );
    }

    #[test]
    fn unwritable_path_names_file() {
        let metrics = Metrics::from_counts(ConfusionCounts::default(), 0.0);
        let err = write_run_report(&[], &metrics, false, Path::new("/nonexistent/out")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/out/violations.jsonl"));
    }
}
