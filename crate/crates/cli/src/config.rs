//! Run configuration: TOML file, command-line flags and their resolution.
//!
//! Every setting resolves as flag, then config file, then default. The
//! detection source (stream file or detector) is one setting: if the flags
//! name either, the config file's source is ignored entirely.
//!
//! ```toml
//! frames = "frames"               # input frame directory
//! detections = "detections.jsonl" # or: detector = "background"
//! background_color = [96, 96, 96] # used by the background detector
//! calibration = "calibration.json"
//! out = "out"
//! workers = 4
//! render = true
//! record_fps = false
//!
//! [policy]
//! threshold_m = 1.8288
//! mode = "reference-scale"        # or "back-projection"
//! mask_required = true
//!
//! [classifier]
//! backend = "reference"           # or "onnx"
//! model = "mask_classifier.onnx"
//! ```
//!
//! Relative paths in a config file are taken relative to the file itself.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use sentinel_core::geometry::DistanceMode;
use sentinel_core::pipeline::default_workers;
use sentinel_core::simulator::BACKGROUND_COLOR;
use sentinel_core::violation::DEFAULT_DISTANCE_THRESHOLD_M;
use sentinel_core::ViolationPolicy;

use crate::CliError;

pub const CONFIG_ENV: &str = "PROXIMITY_SENTINEL_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    /// Connected regions that differ from a flat background color.
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    #[default]
    Reference,
    Onnx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    ReferenceScale,
    BackProjection,
}

impl From<ModeArg> for DistanceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ReferenceScale => DistanceMode::ReferenceScale,
            ModeArg::BackProjection => DistanceMode::BackProjection,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub threshold_m: Option<f64>,
    pub mode: Option<DistanceMode>,
    pub mask_required: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ClassifierFile {
    pub backend: Option<BackendKind>,
    pub model: Option<PathBuf>,
}

/// The TOML config file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub frames: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub detector: Option<DetectorKind>,
    pub background_color: Option<[u8; 3]>,
    pub calibration: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub render: Option<bool>,
    pub record_fps: Option<bool>,
    #[serde(default)]
    pub policy: PolicyFile,
    #[serde(default)]
    pub classifier: ClassifierFile,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        for p in
            [&mut self.frames, &mut self.detections, &mut self.calibration, &mut self.out, &mut self.classifier.model]
                .into_iter()
                .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Flags shared by `run` and `bench`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// TOML config file (also read from PROXIMITY_SENTINEL_CONFIG).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of input frames (.ppm or .png), read in filename order.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// JSONL detection stream aligned with the frame directory.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Find faces with a built-in detector instead of a detection stream.
    #[arg(long, value_enum)]
    pub detector: Option<DetectorKind>,
    /// Background color for the background detector, as r,g,b.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub background_color: Option<Vec<u8>>,
    /// Calibration JSON written by `calibrate`.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Violation distance in meters (default 1.8288).
    #[arg(long)]
    pub threshold_m: Option<f64>,
    /// Distance estimate (default reference-scale).
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Mark unmasked faces red even when nobody is too close (default true).
    #[arg(long)]
    pub mask_required: Option<bool>,
    /// Mask classifier (default reference).
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// ONNX model file for the onnx backend.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output directory for annotated frames and reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: logical CPUs).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Skip drawing annotated frames.
    #[arg(long)]
    pub no_render: bool,
    /// Put the measured frame rate in summary.json (makes reports run-dependent).
    #[arg(long)]
    pub record_fps: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectionSource {
    Stream(PathBuf),
    Detector { kind: DetectorKind, background: [u8; 3] },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendChoice {
    Reference,
    Onnx(PathBuf),
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub frames: Option<PathBuf>,
    pub detections: Option<DetectionSource>,
    pub calibration: Option<PathBuf>,
    pub policy: ViolationPolicy,
    pub backend: BackendChoice,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub render: bool,
    pub record_fps: bool,
}

fn pick_source(
    detections: Option<PathBuf>,
    detector: Option<DetectorKind>,
    background: [u8; 3],
    origin: &str,
) -> Result<Option<DetectionSource>, CliError> {
    match (detections, detector) {
        (Some(_), Some(_)) => {
            Err(CliError::Usage(format!("{origin} sets both a detection stream and a detector; choose one")))
        }
        (Some(p), None) => Ok(Some(DetectionSource::Stream(p))),
        (None, Some(kind)) => Ok(Some(DetectionSource::Detector { kind, background })),
        (None, None) => Ok(None),
    }
}

impl RunConfig {
    /// Merges flags over an optional config file over defaults.
    pub fn resolve(flags: &RunFlags, file: Option<ConfigFile>) -> Result<Self, CliError> {
        let file = file.unwrap_or_default();
        let background = match &flags.background_color {
            Some(c) => [c[0], c[1], c[2]],
            None => file.background_color.unwrap_or(BACKGROUND_COLOR),
        };
        let detections = match pick_source(flags.detections.clone(), flags.detector, background, "the command line")? {
            Some(s) => Some(s),
            None => pick_source(file.detections, file.detector, background, "the config file")?,
        };
        let policy = ViolationPolicy {
            distance_threshold_m: flags.threshold_m.or(file.policy.threshold_m).unwrap_or(DEFAULT_DISTANCE_THRESHOLD_M),
            mode: flags.mode.map(DistanceMode::from).or(file.policy.mode).unwrap_or_default(),
            mask_required: flags.mask_required.or(file.policy.mask_required).unwrap_or(true),
        };
        policy.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let model = flags.model.clone().or(file.classifier.model);
        let backend = match flags.backend.or(file.classifier.backend).unwrap_or_default() {
            BackendKind::Reference => BackendChoice::Reference,
            BackendKind::Onnx => {
                BackendChoice::Onnx(model.ok_or_else(|| CliError::Usage("the onnx backend needs a model path".into()))?)
            }
        };
        let workers = flags.workers.or(file.workers).unwrap_or_else(default_workers);
        if workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        Ok(Self {
            frames: flags.frames.clone().or(file.frames),
            detections,
            calibration: flags.calibration.clone().or(file.calibration),
            policy,
            backend,
            out: flags.out.clone().or(file.out),
            workers,
            render: !flags.no_render && file.render.unwrap_or(true),
            record_fps: flags.record_fps || file.record_fps.unwrap_or(false),
        })
    }

    /// Loads the config file named by `--config`, or by the environment
    /// variable when the flag is absent, and resolves against it.
    pub fn from_flags(flags: &RunFlags, env_config: Option<PathBuf>) -> Result<Self, CliError> {
        let file = match flags.config.clone().or(env_config) {
            Some(path) => Some(ConfigFile::load(&path)?),
            None => None,
        };
        Self::resolve(flags, file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::resolve(&RunFlags { workers: Some(3), ..Default::default() }, None).unwrap();
        assert_eq!(cfg.policy, ViolationPolicy::default());
        assert_eq!(cfg.backend, BackendChoice::Reference);
        assert_eq!(cfg.detections, None);
        assert!(cfg.render);
        assert!(!cfg.record_fps);
        assert_eq!(cfg.workers, 3);
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let file =
            ConfigFile::parse("workers = 2\nrender = false\n[policy]\nthreshold_m = 2.5\nmode = \"back-projection\"\n")
                .unwrap();
        let flags = RunFlags { threshold_m: Some(1.0), ..Default::default() };
        let cfg = RunConfig::resolve(&flags, Some(file)).unwrap();
        assert_eq!(cfg.policy.distance_threshold_m, 1.0);
        assert_eq!(cfg.policy.mode, DistanceMode::BackProjection);
        assert!(cfg.policy.mask_required);
        assert_eq!(cfg.workers, 2);
        assert!(!cfg.render);
    }

    #[test]
    fn detection_source_overrides_as_a_unit() {
        let file = ConfigFile::parse("detector = \"background\"\n").unwrap();
        let flags = RunFlags { detections: Some("d.jsonl".into()), ..Default::default() };
        let cfg = RunConfig::resolve(&flags, Some(file.clone())).unwrap();
        assert_eq!(cfg.detections, Some(DetectionSource::Stream("d.jsonl".into())));
        let cfg = RunConfig::resolve(&RunFlags::default(), Some(file)).unwrap();
        assert_eq!(
            cfg.detections,
            Some(DetectionSource::Detector { kind: DetectorKind::Background, background: BACKGROUND_COLOR })
        );
    }

    #[test]
    fn both_sources_rejected() {
        let flags =
            RunFlags { detections: Some("d".into()), detector: Some(DetectorKind::Background), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&flags, None), Err(CliError::Usage(_))));
        let file = ConfigFile::parse("detections = \"d\"\ndetector = \"background\"\n").unwrap();
        assert!(matches!(RunConfig::resolve(&RunFlags::default(), Some(file)), Err(CliError::Usage(_))));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        for flags in [
            RunFlags { threshold_m: Some(0.0), ..Default::default() },
            RunFlags { threshold_m: Some(f64::NAN), ..Default::default() },
            RunFlags { workers: Some(0), ..Default::default() },
            RunFlags { backend: Some(BackendKind::Onnx), ..Default::default() },
        ] {
            assert!(matches!(RunConfig::resolve(&flags, None), Err(CliError::Usage(_))), "{flags:?}");
        }
        assert!(ConfigFile::parse("unknown_key = 1\n").is_err());
        assert!(ConfigFile::parse("[policy]\nmode = \"sideways\"\n").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "frames = \"in\"\ncalibration = \"/abs/calib.json\"\n").unwrap();
        let cfg = RunConfig::from_flags(&RunFlags { config: Some(path), ..Default::default() }, None).unwrap();
        assert_eq!(cfg.frames, Some(dir.path().join("in")));
        assert_eq!(cfg.calibration, Some(PathBuf::from("/abs/calib.json")));
    }

    #[test]
    fn env_config_used_only_without_flag() {
        let dir = tempfile::tempdir().unwrap();
        let env_path = dir.path().join("env.toml");
        let flag_path = dir.path().join("flag.toml");
        std::fs::write(&env_path, "workers = 5\n").unwrap();
        std::fs::write(&flag_path, "workers = 7\n").unwrap();
        let cfg = RunConfig::from_flags(&RunFlags::default(), Some(env_path.clone())).unwrap();
        assert_eq!(cfg.workers, 5);
        let flags = RunFlags { config: Some(flag_path), ..Default::default() };
        assert_eq!(RunConfig::from_flags(&flags, Some(env_path)).unwrap().workers, 7);
        let missing = RunFlags { config: Some(dir.path().join("nope.toml")), ..Default::default() };
        assert!(matches!(RunConfig::from_flags(&missing, None), Err(CliError::Usage(_))));
    }
}
