//! Synthetic scenes with exact ground truth.
//!
//! Agents are faces at known camera-frame positions. Projecting them through
//! a pinhole camera yields the detections the rest of the crate consumes,
//! while the scene itself provides the true 3D separations and violation
//! labels to check those detections against.

mod rng;
mod stream;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rng::{frame_seed, SimRng};
pub use stream::{SyntheticFrame, SyntheticStream, SyntheticStreamConfig};

use crate::classifier::MaskLabel;
use crate::geometry::{euclidean_distance_slices, BoundingBox, CameraCalibration, DEFAULT_FACE_WIDTH_M};
use crate::ingest::{pixel_span, FrameRecord, RawDetection, RgbImage};

/// Box height as a multiple of its width.
pub const BOX_ASPECT: f64 = 1.2;

pub const BACKGROUND_COLOR: [u8; 3] = [96, 96, 96];
pub const SKIN_COLOR: [u8; 3] = [224, 172, 140];
pub const MASK_COLOR: [u8; 3] = [100, 160, 230];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("agent at depth {z} is not in front of the camera")]
    BehindCamera { z: f64 },
    #[error("invalid scene bounds: {0}")]
    Bounds(String),
    #[error("invalid camera: {0}")]
    Camera(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    /// `(X, Y, Z)` in meters, camera frame, Z forward.
    pub position: [f64; 3],
    pub face_width_m: f64,
    pub mask: MaskLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimCamera {
    pub focal_length_px: f64,
    pub width: u32,
    pub height: u32,
    pub principal_point: [f64; 2],
}

impl Default for SimCamera {
    fn default() -> Self {
        Self::centered(800.0, 640, 480)
    }
}

impl SimCamera {
    pub fn centered(focal_length_px: f64, width: u32, height: u32) -> Self {
        Self { focal_length_px, width, height, principal_point: [width as f64 / 2.0, height as f64 / 2.0] }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.focal_length_px.is_finite() && self.focal_length_px > 0.0) {
            return Err(SimError::Camera(format!("focal length {} must be positive", self.focal_length_px)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(SimError::Camera(format!("image size {}x{} must be positive", self.width, self.height)));
        }
        Ok(())
    }

    /// The calibration a perfect reference shot with this camera would produce.
    pub fn calibration(&self, face_width_m: f64, reference_distance_m: f64) -> CameraCalibration<f64> {
        CameraCalibration {
            focal_length_px: self.focal_length_px,
            known_face_width_m: face_width_m,
            reference_distance_m,
            principal_point: self.principal_point,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Round box corners to whole pixels.
    pub quantize: bool,
    /// Standard deviation of independent Gaussian jitter on each corner coordinate.
    pub jitter_sigma_px: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.jitter_sigma_px.is_finite() && self.jitter_sigma_px >= 0.0 {
            Ok(())
        } else {
            Err(SimError::Bounds(format!("jitter sigma {} must be >= 0", self.jitter_sigma_px)))
        }
    }

    pub fn is_noiseless(&self) -> bool {
        !self.quantize && self.jitter_sigma_px == 0.0
    }

    pub fn apply(&self, bbox: BoundingBox<f64>, rng: &mut SimRng) -> BoundingBox<f64> {
        let mut b = bbox;
        if self.jitter_sigma_px > 0.0 {
            b = b.map(|v| v + self.jitter_sigma_px * rng.normal());
        }
        if self.quantize {
            b = b.map(f64::round);
        }
        b
    }
}

/// Sampling region for [`generate_scene`]; each range is `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneBounds {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
    pub face_width_m: [f64; 2],
    /// Relative frequency of with_mask, without_mask, worn_incorrectly.
    pub mask_weights: [f64; 3],
}

impl Default for SceneBounds {
    fn default() -> Self {
        Self {
            x: [-1.5, 1.5],
            y: [-0.4, 0.4],
            z: [4.0, 10.0],
            face_width_m: [DEFAULT_FACE_WIDTH_M, DEFAULT_FACE_WIDTH_M],
            mask_weights: [0.6, 0.25, 0.15],
        }
    }
}

impl SceneBounds {
    pub fn with_depth(mut self, z_min: f64, z_max: f64) -> Self {
        self.z = [z_min, z_max];
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, [lo, hi]) in [("x", self.x), ("y", self.y), ("z", self.z), ("face_width_m", self.face_width_m)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(SimError::Bounds(format!("{name} range [{lo}, {hi}] is not ordered")));
            }
        }
        if self.z[0] <= 0.0 {
            return Err(SimError::Bounds(format!("z_min {} must be > 0", self.z[0])));
        }
        if self.face_width_m[0] <= 0.0 {
            return Err(SimError::Bounds("face width must be > 0".into()));
        }
        let total: f64 = self.mask_weights.iter().sum();
        if self.mask_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || total <= 0.0 {
            return Err(SimError::Bounds("mask weights must be non-negative with a positive sum".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub camera: SimCamera,
    pub agents: Vec<Agent>,
    pub noise: NoiseModel,
    /// Seed for the noise stream; detections are reproducible from it.
    pub seed: u64,
}

/// Noiseless pinhole projection of a face: width `f W / Z`, centered on
/// `(f X / Z + cx, f Y / Z + cy)`, height [`BOX_ASPECT`] times the width.
pub fn project_agent(agent: &Agent, camera: &SimCamera) -> Result<BoundingBox<f64>, SimError> {
    let [x, y, z] = agent.position;
    if z.is_nan() || z <= 0.0 {
        return Err(SimError::BehindCamera { z });
    }
    let f = camera.focal_length_px;
    let width = f * agent.face_width_m / z;
    let u = f * x / z + camera.principal_point[0];
    let v = f * y / z + camera.principal_point[1];
    Ok(BoundingBox::from_center(u, v, width, BOX_ASPECT * width))
}

/// Exact pairwise 3D separations, symmetric with a zero diagonal.
pub fn ground_truth_distances(scene: &Scene) -> Vec<Vec<f64>> {
    let agents = &scene.agents;
    let n = agents.len();
    let mut m = vec![vec![0.0; n]; n];
    for (i, a) in agents.iter().enumerate() {
        for (j, b) in agents.iter().enumerate().skip(i + 1) {
            let d = euclidean_distance_slices(&a.position, &b.position).expect("3D positions");
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    m
}

/// Agent pairs `(i, j)`, `i < j`, strictly closer than `threshold_m`.
pub fn ground_truth_violations(scene: &Scene, threshold_m: f64) -> Vec<[usize; 2]> {
    let d = ground_truth_distances(scene);
    let mut pairs = Vec::new();
    for (i, row) in d.iter().enumerate() {
        for (j, &dist) in row.iter().enumerate().skip(i + 1) {
            if dist < threshold_m {
                pairs.push([i, j]);
            }
        }
    }
    pairs
}

/// Samples `n_agents` faces uniformly within `bounds`, seen by the default camera.
pub fn generate_scene(n_agents: usize, seed: u64, bounds: &SceneBounds) -> Result<Scene, SimError> {
    bounds.validate()?;
    let mut rng = SimRng::new(seed);
    let total: f64 = bounds.mask_weights.iter().sum();
    let agents = (0..n_agents)
        .map(|_| {
            let x = rng.uniform(bounds.x[0], bounds.x[1]);
            let y = rng.uniform(bounds.y[0], bounds.y[1]);
            let z = rng.uniform(bounds.z[0], bounds.z[1]);
            let face_width_m = rng.uniform(bounds.face_width_m[0], bounds.face_width_m[1]);
            let mut pick = rng.unit() * total;
            let mut mask = MaskLabel::WornIncorrectly;
            for (label, w) in MaskLabel::ALL.into_iter().zip(bounds.mask_weights) {
                if pick < w {
                    mask = label;
                    break;
                }
                pick -= w;
            }
            Agent { position: [x, y, z], face_width_m, mask }
        })
        .collect();
    Ok(Scene { camera: SimCamera::default(), agents, noise: NoiseModel::default(), seed })
}

impl Scene {
    pub fn with_camera(mut self, camera: SimCamera) -> Self {
        self.camera = camera;
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    /// Detected boxes, one per agent, with the scene's noise model applied.
    pub fn detections(&self) -> Result<Vec<BoundingBox<f64>>, SimError> {
        self.camera.validate()?;
        self.noise.validate()?;
        let mut rng = SimRng::new(self.seed ^ 0x6E6F_6973_6500_0000);
        self.agents.iter().map(|a| project_agent(a, &self.camera).map(|b| self.noise.apply(b, &mut rng))).collect()
    }

    /// Detection stream record with per-agent truth labels.
    pub fn frame_record(&self, frame: u64, threshold_m: f64) -> Result<FrameRecord, SimError> {
        let boxes = self.detections()?;
        let mut violating = vec![false; self.agents.len()];
        for [i, j] in ground_truth_violations(self, threshold_m) {
            violating[i] = true;
            violating[j] = true;
        }
        let detections = boxes
            .into_iter()
            .zip(&self.agents)
            .zip(violating)
            .map(|((bbox, agent), v)| RawDetection {
                bbox,
                confidence: 1.0,
                truth_label: Some(agent.mask),
                truth_violation: Some(v),
            })
            .collect();
        Ok(FrameRecord { frame, detections })
    }

    /// Flat-shaded frame: far faces first, each drawn as a skin-colored box
    /// whose middle and bottom thirds carry the mask color when worn.
    pub fn render(&self) -> Result<RgbImage, SimError> {
        let boxes = self.detections()?;
        let mut img = RgbImage::filled(self.camera.width, self.camera.height, BACKGROUND_COLOR);
        let mut order: Vec<usize> = (0..self.agents.len()).collect();
        order.sort_by(|&a, &b| self.agents[b].position[2].total_cmp(&self.agents[a].position[2]).then(a.cmp(&b)));
        for i in order {
            let [x0, y0, x1, y1] = pixel_span(&boxes[i]);
            if x1 <= x0 || y1 <= y0 {
                continue;
            }
            let h = y1 - y0;
            let (t1, t2) = (y0 + h / 3, y0 + 2 * h / 3);
            let (middle, bottom) = match self.agents[i].mask {
                MaskLabel::WithMask => (MASK_COLOR, MASK_COLOR),
                MaskLabel::WithoutMask => (SKIN_COLOR, SKIN_COLOR),
                MaskLabel::WornIncorrectly => (SKIN_COLOR, MASK_COLOR),
            };
            img.fill_rect(x0, y0, x1, t1, SKIN_COLOR);
            img.fill_rect(x0, t1, x1, t2, middle);
            img.fill_rect(x0, t2, x1, y1, bottom);
        }
        Ok(img)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{estimate_depth, pixel_width};
    use approx::assert_relative_eq;

    fn agent(x: f64, y: f64, z: f64) -> Agent {
        Agent { position: [x, y, z], face_width_m: 0.15, mask: MaskLabel::WithMask }
    }

    fn square_camera() -> SimCamera {
        SimCamera { focal_length_px: 800.0, width: 640, height: 640, principal_point: [320.0, 320.0] }
    }

    #[test]
    fn projection_examples() {
        let b = project_agent(&agent(0.0, 0.0, 2.0), &square_camera()).unwrap();
        assert_relative_eq!(pixel_width(&b).unwrap(), 60.0, max_relative = 1e-12);
        assert_eq!(b.centroid(), [320.0, 320.0]);
        assert_relative_eq!(b.height(), 72.0, max_relative = 1e-12);
        let b = project_agent(&agent(0.0, 0.0, 4.0), &square_camera()).unwrap();
        assert_relative_eq!(pixel_width(&b).unwrap(), 30.0, max_relative = 1e-12);
        assert_eq!(project_agent(&agent(0.0, 0.0, -1.0), &square_camera()), Err(SimError::BehindCamera { z: -1.0 }));
        assert!(project_agent(&agent(0.0, 0.0, 0.0), &square_camera()).is_err());
    }

    #[test]
    fn ground_truth_examples() {
        let scene = |agents| Scene { camera: SimCamera::default(), agents, noise: NoiseModel::default(), seed: 0 };
        let d = ground_truth_distances(&scene(vec![agent(0.0, 0.0, 2.0), agent(0.0, 0.0, 4.0)]));
        assert_eq!(d[0][1], 2.0);
        assert_eq!(d[1][0], 2.0);
        let d = ground_truth_distances(&scene(vec![agent(2.0, 0.0, 4.0), agent(-1.0, 0.0, 5.0)]));
        assert_relative_eq!(d[0][1], 3.16228, epsilon = 1e-5);
        assert_eq!(ground_truth_distances(&scene(vec![agent(1.0, 1.0, 1.0)])), vec![vec![0.0]]);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_scene(25, 42, &SceneBounds::default()).unwrap();
        let b = generate_scene(25, 42, &SceneBounds::default()).unwrap();
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        assert_ne!(a, generate_scene(25, 43, &SceneBounds::default()).unwrap());
        assert!(generate_scene(0, 42, &SceneBounds::default()).unwrap().agents.is_empty());
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(generate_scene(3, 1, &SceneBounds::default().with_depth(0.0, 5.0)).is_err());
        assert!(generate_scene(3, 1, &SceneBounds::default().with_depth(-2.0, 5.0)).is_err());
        assert!(generate_scene(3, 1, &SceneBounds::default().with_depth(6.0, 5.0)).is_err());
    }

    #[test]
    fn projected_widths_within_depth_bounds() {
        let bounds = SceneBounds::default().with_depth(1.0, 10.0);
        let scene = generate_scene(1000, 9, &bounds).unwrap();
        let (lo, hi) = (800.0 * 0.15 / 10.0, 800.0 * 0.15 / 1.0);
        for b in scene.detections().unwrap() {
            let p = pixel_width(&b).unwrap();
            assert!(p >= lo * (1.0 - 1e-12) && p <= hi * (1.0 + 1e-12), "width {p}");
        }
    }

    #[test]
    fn noiseless_projection_inverts_depth() {
        let scene = generate_scene(200, 5, &SceneBounds::default().with_depth(1.0, 10.0)).unwrap();
        let calib = scene.camera.calibration(0.15, 2.0);
        for (a, b) in scene.agents.iter().zip(scene.detections().unwrap()) {
            assert_relative_eq!(estimate_depth(&calib, &b).unwrap(), a.position[2], max_relative = 1e-9);
        }
    }

    #[test]
    fn noise_is_reproducible_and_quantizes() {
        let noise = NoiseModel { quantize: true, jitter_sigma_px: 1.5 };
        let scene = generate_scene(10, 3, &SceneBounds::default()).unwrap().with_noise(noise);
        let a = scene.detections().unwrap();
        assert_eq!(a, scene.detections().unwrap());
        assert!(a.iter().all(|b| b.to_array().iter().all(|v| v.fract() == 0.0)));
        let bad = scene.clone().with_noise(NoiseModel { quantize: false, jitter_sigma_px: -1.0 });
        assert!(bad.detections().is_err());
    }

    #[test]
    fn frame_record_marks_close_pairs() {
        let scene = Scene {
            camera: SimCamera::default(),
            agents: vec![agent(0.0, 0.0, 5.0), agent(1.0, 0.0, 5.0), agent(-1.5, 0.0, 8.0)],
            noise: NoiseModel::default(),
            seed: 0,
        };
        let rec = scene.frame_record(4, 1.8288).unwrap();
        assert_eq!(rec.frame, 4);
        let flags: Vec<_> = rec.detections.iter().map(|d| d.truth_violation.unwrap()).collect();
        assert_eq!(flags, vec![true, true, false]);
        assert_eq!(ground_truth_violations(&scene, 1.8288), vec![[0, 1]]);
    }

    #[test]
    fn render_draws_nearer_faces_on_top() {
        let mut near = agent(0.0, 0.0, 4.0);
        near.mask = MaskLabel::WithoutMask;
        let scene = Scene {
            camera: SimCamera::default(),
            agents: vec![near, agent(0.0, 0.0, 8.0)],
            noise: NoiseModel::default(),
            seed: 0,
        };
        let img = scene.render().unwrap();
        // center of both boxes: the unmasked near face wins
        assert_eq!(img.get(320, 255), SKIN_COLOR);
        assert_eq!(img.get(5, 5), BACKGROUND_COLOR);
    }
}
