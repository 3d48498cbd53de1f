//! JSONL detection streams: one object per frame.
//!
//! ```text
//! {"frame":0,"detections":[{"box":[10,5,70,80],"conf":0.9,"truth_label":"with_mask","truth_violation":false}]}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::IngestError;
use crate::classifier::MaskLabel;
use crate::geometry::BoundingBox;

/// A face box as reported by a detector, with optional ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDetection {
    #[serde(rename = "box", serialize_with = "box_to_array", deserialize_with = "box_from_array")]
    pub bbox: BoundingBox<f64>,
    #[serde(rename = "conf")]
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_label: Option<MaskLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_violation: Option<bool>,
}

impl RawDetection {
    pub fn new(bbox: BoundingBox<f64>, confidence: f64) -> Self {
        Self { bbox, confidence, truth_label: None, truth_violation: None }
    }

    pub fn has_truth(&self) -> bool {
        self.truth_label.is_some() || self.truth_violation.is_some()
    }
}

fn box_to_array<S: Serializer>(b: &BoundingBox<f64>, s: S) -> Result<S::Ok, S::Error> {
    b.to_array().serialize(s)
}

fn box_from_array<'de, D: Deserializer<'de>>(d: D) -> Result<BoundingBox<f64>, D::Error> {
    let [x1, y1, x2, y2] = <[f64; 4]>::deserialize(d)?;
    Ok(BoundingBox::new(x1, y1, x2, y2))
}

/// All detections for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u64,
    pub detections: Vec<RawDetection>,
}

impl FrameRecord {
    pub fn empty(frame: u64) -> Self {
        Self { frame, detections: Vec::new() }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("frame record serializes")
    }
}

/// Line-by-line reader that validates the schema and frame ordering.
pub struct DetectionStream<R> {
    reader: R,
    line: usize,
    previous: Option<u64>,
    buf: String,
    failed: bool,
}

pub fn load_detection_stream(path: impl AsRef<Path>) -> Result<DetectionStream<BufReader<File>>, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_detection_stream(BufReader::new(file)))
}

pub fn parse_detection_stream<R: BufRead>(reader: R) -> DetectionStream<R> {
    DetectionStream { reader, line: 0, previous: None, buf: String::new(), failed: false }
}

impl<R: BufRead> DetectionStream<R> {
    fn parse_line(&mut self, text: &str) -> Result<FrameRecord, IngestError> {
        let record: FrameRecord =
            serde_json::from_str(text).map_err(|e| IngestError::Parse { line: self.line, reason: e.to_string() })?;
        for (i, det) in record.detections.iter().enumerate() {
            if !(0.0..=1.0).contains(&det.confidence) {
                return Err(IngestError::Parse {
                    line: self.line,
                    reason: format!("detection {i}: confidence {} outside [0, 1]", det.confidence),
                });
            }
        }
        if let Some(previous) = self.previous {
            if record.frame <= previous {
                return Err(IngestError::Ordering { line: self.line, previous, found: record.frame });
            }
        }
        self.previous = Some(record.frame);
        Ok(record)
    }
}

impl<R: BufRead> Iterator for DetectionStream<R> {
    type Item = Result<FrameRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(IngestError::Parse { line: self.line, reason: e.to_string() }));
                }
            }
            let text = std::mem::take(&mut self.buf);
            let trimmed = text.trim();
            if trimmed.is_empty() {
                continue;
            }
            let result = self.parse_line(trimmed);
            self.buf = text;
            if result.is_err() {
                self.failed = true;
            }
            return Some(result);
        }
    }
}

pub fn write_detection_stream<'a, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = &'a FrameRecord>,
) -> std::io::Result<()> {
    for record in records {
        writeln!(out, "{}", record.to_json_line())?;
    }
    Ok(())
}
