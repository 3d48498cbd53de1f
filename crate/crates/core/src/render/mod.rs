//! Annotated frames and run reports.

mod font;
mod report;

use serde::{Deserialize, Serialize};

pub use font::{glyph, text_pixels, ADVANCE as GLYPH_ADVANCE, GLYPH_HEIGHT, GLYPH_WIDTH};
pub use report::{write_run_report, ReportError, ReportPaths, RunSummary};

use crate::ingest::{pixel_span, Frame, RgbImage};
use crate::scalar::Scalar;
use crate::violation::{BoxColor, FrameAssessment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationStyle {
    pub compliant_color: [u8; 3],
    pub violation_color: [u8; 3],
    pub thickness: u32,
    pub labels: bool,
}

impl Default for AnnotationStyle {
    fn default() -> Self {
        Self { compliant_color: [0, 255, 0], violation_color: [255, 0, 0], thickness: 2, labels: true }
    }
}

impl AnnotationStyle {
    pub fn color(&self, c: BoxColor) -> [u8; 3] {
        match c {
            BoxColor::Green => self.compliant_color,
            BoxColor::Red => self.violation_color,
        }
    }
}

fn put_clipped(img: &mut RgbImage, x: i64, y: i64, color: [u8; 3]) {
    if x >= 0 && y >= 0 && x < img.width() as i64 && y < img.height() as i64 {
        img.put(x as u32, y as u32, color);
    }
}

fn draw_outline(img: &mut RgbImage, [x0, y0, x1, y1]: [i64; 4], thickness: i64, color: [u8; 3]) {
    for t in 0..thickness {
        let (l, r, top, bottom) = (x0 + t, x1 - 1 - t, y0 + t, y1 - 1 - t);
        if l > r || top > bottom {
            break;
        }
        // clip the scan ranges first so huge boxes stay cheap
        let xs = l.max(-1)..=r.min(img.width() as i64);
        let ys = top.max(-1)..=bottom.min(img.height() as i64);
        for x in xs {
            put_clipped(img, x, top, color);
            put_clipped(img, x, bottom, color);
        }
        for y in ys {
            put_clipped(img, l, y, color);
            put_clipped(img, r, y, color);
        }
    }
}

/// Draws each assessed person's box, green or red, with an optional caption
/// just above it. Returns a new frame; the input is untouched.
pub fn annotate<T: Scalar>(frame: &Frame, assessment: &FrameAssessment<T>, style: &AnnotationStyle) -> Frame {
    let mut out = frame.clone();
    let thickness = style.thickness.max(1) as i64;
    for person in &assessment.persons {
        let bbox = person.bbox.map(Scalar::as_f64);
        if bbox.validate().is_err() {
            continue;
        }
        let span = pixel_span(&bbox);
        let color = style.color(person.box_color);
        draw_outline(&mut out.image, span, thickness, color);
        if style.labels {
            let (tx, ty) = (span[0], span[1] - GLYPH_HEIGHT - 2);
            for (dx, dy) in text_pixels(person.classification.label.caption()) {
                put_clipped(&mut out.image, tx + dx, ty + dy, color);
            }
        }
    }
    out
}
