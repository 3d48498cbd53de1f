use super::ClassifierError;
use crate::ingest::RgbImage;

/// Side length of the square classifier input.
pub const INPUT_SIZE: usize = 150;
pub const INPUT_CHANNELS: usize = 3;
pub const INPUT_LEN: usize = INPUT_SIZE * INPUT_SIZE * INPUT_CHANNELS;

/// 150x150x3 HWC tensor with values in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor(Vec<f32>);

impl InputTensor {
    pub fn from_vec(values: Vec<f32>) -> Result<Self, ClassifierError> {
        if values.len() != INPUT_LEN {
            return Err(ClassifierError::Shape(format!("input tensor needs {INPUT_LEN} values, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(ClassifierError::Shape(format!("input value {v} outside [-1, 1]")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.0[(row * INPUT_SIZE + col) * INPUT_CHANNELS + channel]
    }
}

/// Sample positions and blend weights for half-pixel-centered bilinear resampling.
fn axis_taps(src_len: usize, dst_len: usize) -> Vec<(usize, usize, f32)> {
    let scale = src_len as f64 / dst_len as f64;
    (0..dst_len)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(src_len - 1);
            (lo, hi, (s - lo as f64) as f32)
        })
        .collect()
}

/// Bilinear resize to 150x150 and map each channel value `x -> x / 127.5 - 1`.
pub fn preprocess(crop: &RgbImage) -> Result<InputTensor, ClassifierError> {
    let (w, h) = (crop.width() as usize, crop.height() as usize);
    if w == 0 || h == 0 {
        return Err(ClassifierError::EmptyCrop);
    }
    let xs = axis_taps(w, INPUT_SIZE);
    let ys = axis_taps(h, INPUT_SIZE);
    let px = crop.pixels();
    let at = |x: usize, y: usize, c: usize| px[(y * w + x) * 3 + c] as f32;
    let mut out = Vec::with_capacity(INPUT_LEN);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let top = at(x0, y0, c) + (at(x1, y0, c) - at(x0, y0, c)) * fx;
                let bottom = at(x0, y1, c) + (at(x1, y1, c) - at(x0, y1, c)) * fx;
                let v = top + (bottom - top) * fy;
                out.push((v / 127.5 - 1.0).clamp(-1.0, 1.0));
            }
        }
    }
    Ok(InputTensor(out))
}
