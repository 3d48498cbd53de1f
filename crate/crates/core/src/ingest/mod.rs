//! Frame and detection acquisition.
//!
//! Frames come from a directory of PPM/PNG images; detections come either
//! from a JSONL stream recorded alongside the frames or from any
//! [`FaceDetector`] implementation.

mod crop;
mod detector;
mod image;
mod source;
mod stream;

use std::path::PathBuf;

use thiserror::Error;

pub use crop::{crop_face, pixel_span};
pub use detector::{BackgroundDetector, FaceDetector};
pub use image::{ImageFormat, RgbImage};
pub use source::{open_frame_source, FrameSource, DEFAULT_FRAME_INTERVAL_MS};
pub use stream::{
    load_detection_stream, parse_detection_stream, write_detection_stream, DetectionStream, FrameRecord, RawDetection,
};

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: decode failed: {reason}")]
    Decode { path: PathBuf, reason: String },
    #[error("{0}: unsupported image format (expected .ppm or .png)")]
    UnsupportedFormat(PathBuf),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: frame index {found} does not follow {previous}")]
    Ordering { line: usize, previous: u64, found: u64 },
    #[error("box lies entirely outside the {width}x{height} frame")]
    EmptyCrop { width: u32, height: u32 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("detector failed: {0}")]
    Detector(String),
}

/// One decoded video frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub index: u64,
    pub timestamp_ms: u64,
    pub image: RgbImage,
}

impl Frame {
    pub fn new(index: u64, timestamp_ms: u64, image: RgbImage) -> Self {
        Self { index, timestamp_ms, image }
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }
}
