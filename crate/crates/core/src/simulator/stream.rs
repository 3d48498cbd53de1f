use serde::{Deserialize, Serialize};

use super::{frame_seed, generate_scene, NoiseModel, Scene, SceneBounds, SimCamera, SimError};
use crate::ingest::{Frame, FrameRecord, DEFAULT_FRAME_INTERVAL_MS};
use crate::violation::DEFAULT_DISTANCE_THRESHOLD_M;

/// Parameters for a multi-frame synthetic run. Every frame is an
/// independent scene seeded from `(seed, frame index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticStreamConfig {
    pub agents: usize,
    pub frames: u64,
    pub seed: u64,
    pub bounds: SceneBounds,
    pub camera: SimCamera,
    pub noise: NoiseModel,
    /// Threshold used to label ground-truth violations.
    pub threshold_m: f64,
}

impl Default for SyntheticStreamConfig {
    fn default() -> Self {
        Self {
            agents: 10,
            frames: 10,
            seed: 42,
            bounds: SceneBounds::default(),
            camera: SimCamera::default(),
            noise: NoiseModel::default(),
            threshold_m: DEFAULT_DISTANCE_THRESHOLD_M,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub frame: Frame,
    pub record: FrameRecord,
    pub scene: Scene,
}

impl SyntheticStreamConfig {
    pub fn scene(&self, index: u64) -> Result<Scene, SimError> {
        self.camera.validate()?;
        Ok(generate_scene(self.agents, frame_seed(self.seed, index), &self.bounds)?
            .with_camera(self.camera)
            .with_noise(self.noise))
    }

    pub fn stream(&self) -> SyntheticStream {
        SyntheticStream { config: self.clone(), next: 0 }
    }
}

/// Lazily generated frames, detections and scenes.
#[derive(Debug, Clone)]
pub struct SyntheticStream {
    config: SyntheticStreamConfig,
    next: u64,
}

impl Iterator for SyntheticStream {
    type Item = Result<SyntheticFrame, SimError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.config.frames {
            return None;
        }
        let index = self.next;
        self.next += 1;
        let build = || -> Result<SyntheticFrame, SimError> {
            let scene = self.config.scene(index)?;
            let image = scene.render()?;
            let record = scene.frame_record(index, self.config.threshold_m)?;
            Ok(SyntheticFrame { frame: Frame::new(index, index * DEFAULT_FRAME_INTERVAL_MS, image), record, scene })
        };
        Some(build())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.config.frames - self.next) as usize;
        (left, Some(left))
    }
}
