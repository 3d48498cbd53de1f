//! Social-distancing and mask-compliance monitoring for video frames.
//!
//! The crate turns per-frame face detections into compliance assessments:
//!
//! - [`geometry`]: pinhole calibration, per-face depth and inter-person distance.
//! - [`ingest`]: image-sequence frames, JSONL detection streams, face crops.
//! - [`classifier`]: 150x150 preprocessing, attention pooling and mask backends.
//! - [`violation`]: distance thresholding, box colors, precision/recall/F1 and FPS.
//! - [`simulator`]: synthetic scenes with exact ground truth.
//! - [`render`]: annotated frames and run reports.
//! - [`pipeline`]: the multi-threaded frame pipeline tying the stages together.
//!
//! Geometry and pooling are generic over [`Scalar`]; the aliases below fix
//! the scalar type for the common cases.

pub mod classifier;
pub mod geometry;
pub mod ingest;
pub mod pipeline;
pub mod render;
pub mod scalar;
pub mod simulator;
pub mod violation;

pub use scalar::Scalar;

pub type BoundingBox = geometry::BoundingBox<f64>;
pub type BoundingBoxF32 = geometry::BoundingBox<f32>;
pub type Point = geometry::Point<f64>;
pub type CameraCalibration = geometry::CameraCalibration<f64>;
pub type CameraCalibrationF32 = geometry::CameraCalibration<f32>;
pub type FeatureMap = classifier::FeatureMap<f64>;
pub type FeatureMapF32 = classifier::FeatureMap<f32>;
pub type ViolationPolicy = violation::ViolationPolicy<f64>;
pub type FrameAssessment = violation::FrameAssessment<f64>;
pub type PersonAssessment = violation::PersonAssessment<f64>;
