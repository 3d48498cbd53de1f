use super::{Frame, IngestError, RgbImage};
use crate::geometry::BoundingBox;

/// Integer pixel extent `[x0, x1) x [y0, y1)` covered by a real-valued box,
/// before clipping to any image.
pub fn pixel_span(bbox: &BoundingBox<f64>) -> [i64; 4] {
    [bbox.x1.floor() as i64, bbox.y1.floor() as i64, bbox.x2.ceil() as i64, bbox.y2.ceil() as i64]
}

/// Cuts the face region out of a frame. Boxes that straddle the frame
/// border are clamped; boxes entirely outside it are rejected.
pub fn crop_face(frame: &Frame, bbox: &BoundingBox<f64>) -> Result<RgbImage, IngestError> {
    crop_image(&frame.image, bbox)
}

pub(crate) fn crop_image(image: &RgbImage, bbox: &BoundingBox<f64>) -> Result<RgbImage, IngestError> {
    bbox.validate()?;
    let (w, h) = (image.width() as i64, image.height() as i64);
    let [x0, y0, x1, y1] = pixel_span(bbox);
    let (x0, x1) = (x0.clamp(0, w), x1.clamp(0, w));
    let (y0, y1) = (y0.clamp(0, h), y1.clamp(0, h));
    if x1 <= x0 || y1 <= y0 {
        return Err(IngestError::EmptyCrop { width: image.width(), height: image.height() });
    }
    image.sub_image(x0 as u32, y0 as u32, (x1 - x0) as u32, (y1 - y0) as u32)
}
