//! Distance mathematics: face pixel width, Euclidean distance, pinhole
//! calibration from a reference image, per-face depth and the separation
//! between two people.
//!
//! Everything here is a pure function over immutable values, generic over
//! [`Scalar`] so the same code serves `f32` and `f64` callers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Real face width assumed when none is configured, in meters.
pub const DEFAULT_FACE_WIDTH_M: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid bounding box ({x1}, {y1}, {x2}, {y2}): need finite coordinates with x2 > x1 and y2 > y1")]
    InvalidBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("point must have at least one finite coordinate")]
    InvalidPoint,
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("distance computation produced a non-finite value")]
    NonFinite,
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

/// Axis-aligned face box in image coordinates, origin at the top-left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox<T> {
    pub x1: T,
    pub y1: T,
    pub x2: T,
    pub y2: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(x1: T, y1: T, x2: T, y2: T) -> Self {
        Self { x1, y1, x2, y2 }
    }

    /// Box of the given size centered on `(cx, cy)`.
    pub fn from_center(cx: T, cy: T, width: T, height: T) -> Self {
        let two = T::lit(2.0);
        Self::new(cx - width / two, cy - height / two, cx + width / two, cy + height / two)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite());
        if finite && self.x2 > self.x1 && self.y2 > self.y1 {
            Ok(())
        } else {
            Err(GeometryError::InvalidBox {
                x1: self.x1.as_f64(),
                y1: self.y1.as_f64(),
                x2: self.x2.as_f64(),
                y2: self.y2.as_f64(),
            })
        }
    }

    pub fn height(&self) -> T {
        self.y2 - self.y1
    }

    /// Center of the box, used as the person's position in the image.
    pub fn centroid(&self) -> [T; 2] {
        let two = T::lit(2.0);
        [(self.x1 + self.x2) / two, (self.y1 + self.y2) / two]
    }

    /// Applies `f` to x1, y1, x2, y2 in that order.
    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> BoundingBox<U> {
        BoundingBox { x1: f(self.x1), y1: f(self.y1), x2: f(self.x2), y2: f(self.y2) }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }
}

/// A point in Euclidean n-space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T>(Vec<T>);

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::InvalidPoint);
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> TryFrom<&[T]> for Point<T> {
    type Error = GeometryError;

    fn try_from(coords: &[T]) -> Result<Self> {
        Self::new(coords.to_vec())
    }
}

/// How the separation between two faces is turned into meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Image-plane separation of the two centroids, scaled to meters by the
    /// ratio of the known face width to the faces' mean pixel width. Depth
    /// difference between the two people is ignored.
    #[default]
    ReferenceScale,
    /// Both faces are back-projected to camera coordinates using their
    /// estimated depth; the 3D separation is returned.
    BackProjection,
}

/// Pinhole calibration derived from a reference image of a face of known
/// width photographed at a known distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraCalibration<T> {
    pub focal_length_px: T,
    pub known_face_width_m: T,
    pub reference_distance_m: T,
    /// Optical center `(cx, cy)` in pixels. Only back-projection reads it.
    pub principal_point: [T; 2],
}

impl<T: Scalar> CameraCalibration<T> {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(GeometryError::Calibration(format!("{name} must be positive and finite, got {v:?}")))
            }
        };
        check("focal_length_px", self.focal_length_px)?;
        check("known_face_width_m", self.known_face_width_m)?;
        check("reference_distance_m", self.reference_distance_m)?;
        if !self.principal_point.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::Calibration("principal_point must be finite".into()));
        }
        Ok(())
    }

    pub fn with_principal_point(mut self, cx: T, cy: T) -> Self {
        self.principal_point = [cx, cy];
        self
    }

    /// Sets the principal point to the center of a `width` x `height` image.
    pub fn centered_on(self, width: u32, height: u32) -> Self {
        let two = T::lit(2.0);
        self.with_principal_point(T::lit(width as f64) / two, T::lit(height as f64) / two)
    }

    pub fn to_f64(&self) -> CameraCalibration<f64> {
        CameraCalibration {
            focal_length_px: self.focal_length_px.as_f64(),
            known_face_width_m: self.known_face_width_m.as_f64(),
            reference_distance_m: self.reference_distance_m.as_f64(),
            principal_point: [self.principal_point[0].as_f64(), self.principal_point[1].as_f64()],
        }
    }
}

/// Pixel width `P = x2 - x1` of a face box.
pub fn pixel_width<T: Scalar>(bbox: &BoundingBox<T>) -> Result<T> {
    bbox.validate()?;
    Ok(bbox.x2 - bbox.x1)
}

/// `sqrt(sum_i (q_i - p_i)^2)`.
pub fn euclidean_distance<T: Scalar>(p: &Point<T>, q: &Point<T>) -> Result<T> {
    euclidean_distance_slices(p.coords(), q.coords())
}

pub(crate) fn euclidean_distance_slices<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(GeometryError::DimensionMismatch { left: p.len(), right: q.len() });
    }
    if p.is_empty() {
        return Err(GeometryError::InvalidPoint);
    }
    let sum = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = b - a;
            d * d
        })
        .fold(T::zero(), |acc, v| acc + v);
    Ok(sum.sqrt())
}

/// Solves the pinhole relation for the focal length: `F = P * D / W`.
///
/// The principal point is left at the origin; use
/// [`CameraCalibration::centered_on`] when back-projection is needed.
pub fn calibrate_focal_length<T: Scalar>(
    known_face_width_m: T,
    reference_distance_m: T,
    measured_width_px: T,
) -> Result<CameraCalibration<T>> {
    for (name, v) in [
        ("known face width", known_face_width_m),
        ("reference distance", reference_distance_m),
        ("measured pixel width", measured_width_px),
    ] {
        if !(v.is_finite() && v > T::zero()) {
            return Err(GeometryError::Calibration(format!("{name} must be positive and finite, got {v:?}")));
        }
    }
    let calib = CameraCalibration {
        focal_length_px: measured_width_px * reference_distance_m / known_face_width_m,
        known_face_width_m,
        reference_distance_m,
        principal_point: [T::zero(), T::zero()],
    };
    calib.validate()?;
    Ok(calib)
}

/// Depth of a face from its pixel width: `Z = W * F / P`.
pub fn estimate_depth<T: Scalar>(calib: &CameraCalibration<T>, bbox: &BoundingBox<T>) -> Result<T> {
    let width = pixel_width(bbox)?;
    let depth = calib.known_face_width_m * calib.focal_length_px / width;
    if depth.is_finite() {
        Ok(depth)
    } else {
        Err(GeometryError::NonFinite)
    }
}

/// Camera-frame position `(X, Y, Z)` of the face centroid.
pub fn back_project<T: Scalar>(calib: &CameraCalibration<T>, bbox: &BoundingBox<T>) -> Result<[T; 3]> {
    let z = estimate_depth(calib, bbox)?;
    let [u, v] = bbox.centroid();
    let [cx, cy] = calib.principal_point;
    let f = calib.focal_length_px;
    Ok([(u - cx) * z / f, (v - cy) * z / f, z])
}

/// Estimated separation between two people, in meters.
pub fn inter_person_distance<T: Scalar>(
    a: &BoundingBox<T>,
    b: &BoundingBox<T>,
    calib: &CameraCalibration<T>,
    mode: DistanceMode,
) -> Result<T> {
    let d = match mode {
        DistanceMode::ReferenceScale => {
            let pa = pixel_width(a)?;
            let pb = pixel_width(b)?;
            let separation_px = euclidean_distance_slices(&a.centroid(), &b.centroid())?;
            let mean_width = (pa + pb) / T::lit(2.0);
            separation_px * calib.known_face_width_m / mean_width
        }
        DistanceMode::BackProjection => {
            let pa = back_project(calib, a)?;
            let pb = back_project(calib, b)?;
            euclidean_distance_slices(&pa, &pb)?
        }
    };
    if d.is_finite() {
        Ok(d)
    } else {
        Err(GeometryError::NonFinite)
    }
}
