//! Synthetic data set writer.
//!
//! Output layout under `--out`:
//!
//! - `frames/frame_%06d.ppm`: rendered frames
//! - `detections.jsonl`: detection stream with per-person truth labels
//! - `calibration.json`: calibration of the simulated camera
//! - `ground_truth.jsonl`: per frame, the violating pair count and the agents
//! - `simulation.json`: the generator settings

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use sentinel_core::geometry::DEFAULT_FACE_WIDTH_M;
use sentinel_core::simulator::{ground_truth_violations, Agent, NoiseModel, SimCamera, SyntheticStreamConfig};
use sentinel_core::violation::DEFAULT_DISTANCE_THRESHOLD_M;

use crate::CliError;

/// Reference distance recorded in the emitted calibration.
pub const CALIBRATION_DISTANCE_M: f64 = 2.0;

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    pub agents: usize,
    #[arg(long, default_value_t = 10)]
    pub frames: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
    #[arg(long, default_value_t = 800.0)]
    pub focal_px: f64,
    /// Gaussian jitter on box edges, in pixels.
    #[arg(long, default_value_t = 0.0)]
    pub jitter_px: f64,
    /// Round box edges to whole pixels.
    #[arg(long)]
    pub quantize: bool,
    /// Threshold used to label ground-truth violations.
    #[arg(long, default_value_t = DEFAULT_DISTANCE_THRESHOLD_M)]
    pub threshold_m: f64,
    #[arg(long)]
    pub out: PathBuf,
}

impl SimulateArgs {
    pub fn stream_config(&self) -> Result<SyntheticStreamConfig, CliError> {
        let camera = SimCamera::centered(self.focal_px, self.width, self.height);
        camera.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let noise = NoiseModel { quantize: self.quantize, jitter_sigma_px: self.jitter_px };
        noise.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if !(self.threshold_m.is_finite() && self.threshold_m > 0.0) {
            return Err(CliError::Usage(format!("threshold must be positive, got {}", self.threshold_m)));
        }
        Ok(SyntheticStreamConfig {
            agents: self.agents,
            frames: self.frames,
            seed: self.seed,
            camera,
            noise,
            threshold_m: self.threshold_m,
            ..SyntheticStreamConfig::default()
        })
    }
}

#[derive(Serialize)]
struct GroundTruthLine<'a> {
    frame: u64,
    violations: usize,
    agents: &'a [Agent],
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:06}.ppm")
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = args.stream_config()?;
    let frames_dir = args.out.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(io_err(&frames_dir))?;

    let calib_path = args.out.join("calibration.json");
    let calib = config.camera.calibration(DEFAULT_FACE_WIDTH_M, CALIBRATION_DISTANCE_M);
    let json = serde_json::to_string_pretty(&calib).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(&calib_path, json + "\n").map_err(io_err(&calib_path))?;

    let settings_path = args.out.join("simulation.json");
    let json = serde_json::to_string_pretty(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(&settings_path, json + "\n").map_err(io_err(&settings_path))?;

    let det_path = args.out.join("detections.jsonl");
    let truth_path = args.out.join("ground_truth.jsonl");
    let mut detections = BufWriter::new(File::create(&det_path).map_err(io_err(&det_path))?);
    let mut truth = BufWriter::new(File::create(&truth_path).map_err(io_err(&truth_path))?);
    let mut total = 0usize;
    for item in config.stream() {
        let f = item.map_err(|e| CliError::Runtime(e.to_string()))?;
        let frame_path = frames_dir.join(frame_file_name(f.frame.index));
        f.frame.image.write(&frame_path).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(detections, "{}", f.record.to_json_line()).map_err(io_err(&det_path))?;
        let violations = ground_truth_violations(&f.scene, config.threshold_m).len();
        total += violations;
        let line = GroundTruthLine { frame: f.frame.index, violations, agents: &f.scene.agents };
        let json = serde_json::to_string(&line).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(truth, "{json}").map_err(io_err(&truth_path))?;
    }
    detections.flush().map_err(io_err(&det_path))?;
    truth.flush().map_err(io_err(&truth_path))?;
    writeln!(out, "frames={} agents={} violations={total}", config.frames, config.agents)?;
    Ok(())
}
