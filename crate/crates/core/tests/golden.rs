//! Annotated-frame golden image. Set `UPDATE_GOLDEN=1` to rewrite it after an
//! intentional rendering change.

use std::path::PathBuf;

use sentinel_core::classifier::ReferenceBackend;
use sentinel_core::geometry::DistanceMode;
use sentinel_core::ingest::RgbImage;
use sentinel_core::pipeline::{process_frame, FrameInput, PipelineConfig};
use sentinel_core::simulator::{SceneBounds, SimCamera, SyntheticStreamConfig};
use sentinel_core::ViolationPolicy;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/annotated_seed42.ppm")
}

fn render() -> RgbImage {
    let camera = SimCamera::centered(200.0, 200, 150);
    let cfg = SyntheticStreamConfig {
        agents: 6,
        frames: 1,
        seed: 42,
        camera,
        bounds: SceneBounds { x: [-4.0, 4.0], ..SceneBounds::default() }.with_depth(2.0, 9.0),
        ..Default::default()
    };
    let f = cfg.stream().next().unwrap().unwrap();
    let policy = ViolationPolicy { mode: DistanceMode::BackProjection, ..ViolationPolicy::default() };
    let config = PipelineConfig { workers: 1, ..PipelineConfig::new(camera.calibration(0.15, 2.0), policy) };
    let input = FrameInput { frame: f.frame, detections: Some(f.record.detections) };
    let out = process_frame(input, &config, &ReferenceBackend, None).unwrap();
    assert_eq!(out.assessment.persons.len(), 6);
    out.annotated.unwrap().image
}

#[test]
fn annotated_frame_matches_golden() {
    let image = render();
    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        image.write(&path).unwrap();
    }
    let golden = RgbImage::read(&path).expect("golden image missing; run with UPDATE_GOLDEN=1");
    assert_eq!((image.width(), image.height()), (golden.width(), golden.height()));
    let diff = image.pixels().iter().zip(golden.pixels()).filter(|(a, b)| a != b).count();
    assert_eq!(diff, 0, "{diff} channel values differ from {}", path.display());
}

#[test]
fn golden_is_ppm_with_both_box_colors() {
    let bytes = std::fs::read(golden_path()).unwrap();
    assert!(bytes.starts_with(b"P6\n200 150\n255\n"));
    let golden = RgbImage::decode_ppm(&bytes).unwrap();
    let has = |c: [u8; 3]| golden.pixels().chunks(3).any(|p| p == c);
    assert!(has([255, 0, 0]));
    assert!(has([0, 255, 0]));
}
