//! Per-frame compliance assessment.
//!
//! Every pair of detected people is measured with
//! [`inter_person_distance`]; a pair closer than the policy threshold is a
//! violation. A person's box turns red when they are part of a violating pair
//! or, with masks required, when their face is not classified as masked.

mod fps;
mod metrics;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fps::{fps_from_timestamps, FpsMeter};
pub use metrics::{compliance_metrics, truth_flagged, ConfusionCounts, Metrics};

use crate::classifier::{Classification, MaskLabel};
use crate::geometry::{
    estimate_depth, inter_person_distance, BoundingBox, CameraCalibration, DistanceMode, GeometryError,
};
use crate::scalar::Scalar;

/// Six feet in meters.
pub const DEFAULT_DISTANCE_THRESHOLD_M: f64 = 1.8288;

#[derive(Debug, Error)]
pub enum ViolationError {
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("prediction/truth misalignment: {0}")]
    Alignment(String),
    #[error("frame rate undefined for {0} completion(s); need at least 2")]
    UndefinedRate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationPolicy<T> {
    pub distance_threshold_m: T,
    pub mode: DistanceMode,
    pub mask_required: bool,
}

impl<T: Scalar> Default for ViolationPolicy<T> {
    fn default() -> Self {
        Self {
            distance_threshold_m: T::lit(DEFAULT_DISTANCE_THRESHOLD_M),
            mode: DistanceMode::ReferenceScale,
            mask_required: true,
        }
    }
}

impl<T: Scalar> ViolationPolicy<T> {
    pub fn validate(&self) -> Result<(), ViolationError> {
        if self.distance_threshold_m.is_finite() && self.distance_threshold_m > T::zero() {
            Ok(())
        } else {
            Err(ViolationError::Policy(format!("threshold must be positive, got {:?}", self.distance_threshold_m)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxColor {
    Green,
    Red,
}

/// A detected face ready for assessment.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedDetection<T> {
    /// Position of the detection in its frame record.
    pub detection_index: usize,
    pub bbox: BoundingBox<T>,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonAssessment<T> {
    pub detection_index: usize,
    pub bbox: BoundingBox<T>,
    pub classification: Classification,
    pub sd_violation: bool,
    pub box_color: BoxColor,
    /// Detection indices of everyone this person is too close to.
    pub violating_partners: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationPair<T> {
    /// Detection indices, `pair[0] < pair[1]`.
    pub pair: [usize; 2],
    pub distance_m: T,
}

/// A detection left out of the assessment, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedPerson {
    pub detection_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAssessment<T> {
    pub frame: u64,
    pub persons: Vec<PersonAssessment<T>>,
    /// Pairwise distances in meters, indexed like `persons`. Not serialized.
    #[serde(skip)]
    pub distances: Vec<Vec<T>>,
    pub violation_pairs: Vec<ViolationPair<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<ExcludedPerson>,
}

impl<T: Scalar> FrameAssessment<T> {
    pub fn empty(frame: u64) -> Self {
        Self { frame, persons: Vec::new(), distances: Vec::new(), violation_pairs: Vec::new(), excluded: Vec::new() }
    }

    pub fn person(&self, detection_index: usize) -> Option<&PersonAssessment<T>> {
        self.persons.iter().find(|p| p.detection_index == detection_index)
    }
}

pub fn box_color(sd_violation: bool, label: MaskLabel, mask_required: bool) -> BoxColor {
    if sd_violation || (mask_required && label != MaskLabel::WithMask) {
        BoxColor::Red
    } else {
        BoxColor::Green
    }
}

/// Assesses one frame. People whose geometry cannot be evaluated are moved to
/// `excluded` and the rest of the frame is still assessed.
pub fn assess_frame<T: Scalar>(
    frame: u64,
    detections: &[ClassifiedDetection<T>],
    calib: &CameraCalibration<T>,
    policy: &ViolationPolicy<T>,
) -> Result<FrameAssessment<T>, ViolationError> {
    calib.validate()?;
    policy.validate()?;
    let mut excluded = Vec::new();
    let mut kept: Vec<&ClassifiedDetection<T>> = Vec::with_capacity(detections.len());
    for det in detections {
        match estimate_depth(calib, &det.bbox) {
            Ok(_) => kept.push(det),
            Err(e) => excluded.push(ExcludedPerson { detection_index: det.detection_index, reason: e.to_string() }),
        }
    }

    let distances = loop {
        match distance_matrix(&kept, calib, policy.mode) {
            Ok(m) => break m,
            Err((j, e)) => {
                let det = kept.remove(j);
                excluded.push(ExcludedPerson { detection_index: det.detection_index, reason: e.to_string() });
            }
        }
    };

    let n = kept.len();
    let mut partners = vec![BTreeSet::new(); n];
    let mut violation_pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if distances[i][j] < policy.distance_threshold_m {
                let (a, b) = (kept[i].detection_index, kept[j].detection_index);
                partners[i].insert(b);
                partners[j].insert(a);
                violation_pairs.push(ViolationPair { pair: [a.min(b), a.max(b)], distance_m: distances[i][j] });
            }
        }
    }

    let persons = kept
        .iter()
        .zip(partners)
        .map(|(det, partners)| {
            let sd_violation = !partners.is_empty();
            PersonAssessment {
                detection_index: det.detection_index,
                bbox: det.bbox,
                classification: det.classification,
                sd_violation,
                box_color: box_color(sd_violation, det.classification.label, policy.mask_required),
                violating_partners: partners,
            }
        })
        .collect();
    excluded.sort_by_key(|e| e.detection_index);
    Ok(FrameAssessment { frame, persons, distances, violation_pairs, excluded })
}

/// Symmetric distance matrix; on failure returns the index of the later
/// person of the first pair that could not be measured.
fn distance_matrix<T: Scalar>(
    dets: &[&ClassifiedDetection<T>],
    calib: &CameraCalibration<T>,
    mode: DistanceMode,
) -> Result<Vec<Vec<T>>, (usize, GeometryError)> {
    let n = dets.len();
    let mut m = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = inter_person_distance(&dets[i].bbox, &dets[j].bbox, calib, mode).map_err(|e| (j, e))?;
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::calibrate_focal_length;
    use proptest::prelude::*;

    fn classification(label: MaskLabel) -> Classification {
        let mut scores = [0.0; 3];
        scores[label.index()] = 1.0;
        Classification::from_scores(scores).unwrap()
    }

    fn calib() -> CameraCalibration<f64> {
        calibrate_focal_length(0.15, 2.0, 60.0).unwrap().centered_on(640, 480)
    }

    fn person(i: usize, cx: f64, label: MaskLabel) -> ClassifiedDetection<f64> {
        ClassifiedDetection {
            detection_index: i,
            bbox: BoundingBox::from_center(cx, 240.0, 60.0, 72.0),
            classification: classification(label),
        }
    }

    #[test]
    fn close_masked_pair_is_red() {
        // 400 px at 60 px face width and W = 0.15 m is 1.0 m
        let dets = [person(0, 100.0, MaskLabel::WithMask), person(1, 500.0, MaskLabel::WithMask)];
        let a = assess_frame(0, &dets, &calib(), &ViolationPolicy::default()).unwrap();
        assert_eq!(a.violation_pairs.len(), 1);
        assert_eq!(a.violation_pairs[0].pair, [0, 1]);
        assert!((a.violation_pairs[0].distance_m - 1.0).abs() < 1e-12);
        assert!(a.persons.iter().all(|p| p.box_color == BoxColor::Red && p.sd_violation));
        assert_eq!(a.persons[0].violating_partners, BTreeSet::from([1]));
    }

    #[test]
    fn lone_masked_person_is_green() {
        let a =
            assess_frame(3, &[person(0, 320.0, MaskLabel::WithMask)], &calib(), &ViolationPolicy::default()).unwrap();
        assert_eq!(a.frame, 3);
        assert!(a.violation_pairs.is_empty());
        assert_eq!(a.persons[0].box_color, BoxColor::Green);
        assert_eq!(a.distances, vec![vec![0.0]]);
    }

    #[test]
    fn unmasked_person_is_red_unless_masks_optional() {
        let dets = [person(0, 320.0, MaskLabel::WithoutMask)];
        let a = assess_frame(0, &dets, &calib(), &ViolationPolicy::default()).unwrap();
        assert_eq!(a.persons[0].box_color, BoxColor::Red);
        assert!(!a.persons[0].sd_violation);
        let policy = ViolationPolicy { mask_required: false, ..ViolationPolicy::default() };
        let a = assess_frame(0, &dets, &calib(), &policy).unwrap();
        assert_eq!(a.persons[0].box_color, BoxColor::Green);
        let dets = [person(0, 320.0, MaskLabel::WornIncorrectly)];
        let a = assess_frame(0, &dets, &calib(), &ViolationPolicy::default()).unwrap();
        assert_eq!(a.persons[0].box_color, BoxColor::Red);
    }

    #[test]
    fn distance_equal_to_threshold_is_compliant() {
        let dets = [person(0, 100.0, MaskLabel::WithMask), person(1, 500.0, MaskLabel::WithMask)];
        let d = assess_frame(0, &dets, &calib(), &ViolationPolicy::default()).unwrap().distances[0][1];
        let policy = ViolationPolicy { distance_threshold_m: d, ..ViolationPolicy::default() };
        let a = assess_frame(0, &dets, &calib(), &policy).unwrap();
        assert!(a.violation_pairs.is_empty());
        assert!(a.persons.iter().all(|p| p.box_color == BoxColor::Green));
    }

    #[test]
    fn degenerate_box_is_excluded_not_fatal() {
        let mut bad = person(1, 300.0, MaskLabel::WithMask);
        bad.bbox.x2 = bad.bbox.x1;
        let dets = [person(0, 100.0, MaskLabel::WithMask), bad, person(2, 150.0, MaskLabel::WithMask)];
        let a = assess_frame(0, &dets, &calib(), &ViolationPolicy::default()).unwrap();
        assert_eq!(a.excluded.len(), 1);
        assert_eq!(a.excluded[0].detection_index, 1);
        assert_eq!(a.persons.len(), 2);
        assert_eq!(a.violation_pairs[0].pair, [0, 2]);
    }

    #[test]
    fn bad_policy_and_calibration_rejected() {
        let policy = ViolationPolicy { distance_threshold_m: 0.0, ..ViolationPolicy::default() };
        assert!(matches!(assess_frame(0, &[], &calib(), &policy), Err(ViolationError::Policy(_))));
        let mut c = calib();
        c.focal_length_px = -1.0;
        assert!(assess_frame(0, &[], &c, &ViolationPolicy::default()).is_err());
    }

    #[test]
    fn works_in_f32() {
        let c = calibrate_focal_length(0.15f32, 2.0, 60.0).unwrap();
        let mk = |i, cx| ClassifiedDetection {
            detection_index: i,
            bbox: BoundingBox::from_center(cx, 240.0f32, 60.0, 72.0),
            classification: classification(MaskLabel::WithMask),
        };
        let a = assess_frame(0, &[mk(0, 100.0), mk(1, 500.0)], &c, &ViolationPolicy::default()).unwrap();
        assert_eq!(a.violation_pairs.len(), 1);
    }

    fn arb_frame() -> impl Strategy<Value = Vec<ClassifiedDetection<f64>>> {
        proptest::collection::vec((0.0f64..640.0, 0.0f64..480.0, 8.0f64..120.0, 0usize..3), 0..25).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (cx, cy, w, l))| ClassifiedDetection {
                    detection_index: i,
                    bbox: BoundingBox::from_center(cx, cy, w, 1.2 * w),
                    classification: classification(MaskLabel::ALL[l]),
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn pair_symmetry_and_color_soundness(dets in arb_frame(), back in any::<bool>(), mask_required in any::<bool>()) {
            let mode = if back { DistanceMode::BackProjection } else { DistanceMode::ReferenceScale };
            let policy = ViolationPolicy { mode, mask_required, ..ViolationPolicy::default() };
            let a = assess_frame(0, &dets, &calib(), &policy).unwrap();
            for p in &a.persons {
                for &q in &p.violating_partners {
                    prop_assert!(a.person(q).unwrap().violating_partners.contains(&p.detection_index));
                }
                let green = !p.sd_violation && (!mask_required || p.classification.label == MaskLabel::WithMask);
                prop_assert_eq!(green, p.box_color == BoxColor::Green);
            }
            let n = a.persons.len();
            for i in 0..n {
                prop_assert_eq!(a.distances[i][i], 0.0);
                for j in 0..n {
                    prop_assert_eq!(a.distances[i][j], a.distances[j][i]);
                }
            }
        }
    }
}
