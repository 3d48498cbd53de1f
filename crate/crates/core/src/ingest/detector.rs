use super::{Frame, IngestError, RawDetection};
use crate::geometry::BoundingBox;

/// Source of face boxes for a frame. Downstream stages only see
/// [`RawDetection`]s, so any localizer can be plugged in here.
pub trait FaceDetector: Send + Sync {
    fn name(&self) -> &str;

    fn detect(&self, frame: &Frame) -> Result<Vec<RawDetection>, IngestError>;
}

/// Finds 4-connected regions that differ from a uniform background color and
/// reports their bounding boxes. Only meaningful on flat-shaded frames such
/// as the simulator's output; overlapping faces merge into one box.
#[derive(Debug, Clone)]
pub struct BackgroundDetector {
    pub background: [u8; 3],
    pub min_area: usize,
}

impl BackgroundDetector {
    pub fn new(background: [u8; 3]) -> Self {
        Self { background, min_area: 4 }
    }
}

impl FaceDetector for BackgroundDetector {
    fn name(&self) -> &str {
        "background"
    }

    fn detect(&self, frame: &Frame) -> Result<Vec<RawDetection>, IngestError> {
        let img = &frame.image;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut seen = vec![false; w * h];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..w * h {
            if seen[start] || img.get((start % w) as u32, (start / w) as u32) == self.background {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
            let mut area = 0usize;
            while let Some(p) = stack.pop() {
                let (x, y) = (p % w, p / w);
                area += 1;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
                let mut visit = |q: usize| {
                    if !seen[q] && img.get((q % w) as u32, (q / w) as u32) != self.background {
                        seen[q] = true;
                        stack.push(q);
                    }
                };
                if x > 0 {
                    visit(p - 1);
                }
                if x + 1 < w {
                    visit(p + 1);
                }
                if y > 0 {
                    visit(p - w);
                }
                if y + 1 < h {
                    visit(p + w);
                }
            }
            if area >= self.min_area {
                let bbox = BoundingBox::new(x0 as f64, y0 as f64, (x1 + 1) as f64, (y1 + 1) as f64);
                out.push(RawDetection::new(bbox, 1.0));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::RgbImage;

    #[test]
    fn finds_separate_rectangles() {
        let mut img = RgbImage::filled(40, 30, [50, 50, 50]);
        img.fill_rect(2, 3, 10, 12, [200, 150, 120]);
        img.fill_rect(20, 5, 31, 25, [10, 200, 10]);
        img.put(39, 29, [1, 2, 3]); // below min_area
        let dets = BackgroundDetector::new([50, 50, 50]).detect(&Frame::new(0, 0, img)).unwrap();
        let boxes: Vec<_> = dets.iter().map(|d| d.bbox.to_array()).collect();
        assert_eq!(boxes, vec![[2.0, 3.0, 10.0, 12.0], [20.0, 5.0, 31.0, 25.0]]);
    }

    #[test]
    fn blank_frame_has_no_detections() {
        let img = RgbImage::filled(8, 8, [0, 0, 0]);
        assert!(BackgroundDetector::new([0, 0, 0]).detect(&Frame::new(0, 0, img)).unwrap().is_empty());
    }
}
