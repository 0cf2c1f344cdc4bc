use nalgebra::DMatrix;

use super::hungarian::hungarian;
use super::track::ObjectTrack;
use super::{AssocMode, AssociationConfig, CameraFrame, Detection};
use crate::error::{Error, Result};
use crate::evaluation::iou3d;
use crate::geometry::{project_cuboid, project_quadric};
use crate::optimizer::ShapeMode;

/// `1 − IoU3D` between world-frame single-view boxes and track boxes; class
/// mismatches are `+inf`.
pub fn cost_matrix_3d(
    dets: &[Detection],
    frame: &CameraFrame,
    tracks: &[ObjectTrack],
) -> Result<DMatrix<f64>> {
    let to_world = frame.pose.inverse();
    let mut cost = DMatrix::from_element(dets.len(), tracks.len(), f64::INFINITY);
    for (i, d) in dets.iter().enumerate() {
        let sv = d
            .sv3d
            .ok_or(Error::MissingSingleView(i))?
            .transformed(&to_world);
        for (j, t) in tracks.iter().enumerate() {
            if t.class_id == d.class_id {
                cost[(i, j)] = 1.0 - iou3d(&sv, &t.estimate.enclosing_obb())?;
            }
        }
    }
    Ok(cost)
}

/// `1 − IoU2D` between detected boxes and track projections. Tracks that are
/// not fully in front of the camera and class mismatches are `+inf`.
pub fn cost_matrix_2d(
    dets: &[Detection],
    frame: &CameraFrame,
    tracks: &[ObjectTrack],
    shape_mode: ShapeMode,
    samples: usize,
) -> Result<DMatrix<f64>> {
    let mut cost = DMatrix::from_element(dets.len(), tracks.len(), f64::INFINITY);
    for (j, t) in tracks.iter().enumerate() {
        let projected = match shape_mode {
            ShapeMode::Cuboid => project_cuboid(&t.estimate, &frame.pose, &frame.intrinsics),
            _ => project_quadric(&t.estimate, &frame.pose, &frame.intrinsics, samples),
        };
        let b = match projected {
            Ok(b) => b,
            Err(Error::Visibility { .. }) => continue,
            Err(e) => return Err(e),
        };
        for (i, d) in dets.iter().enumerate() {
            if t.class_id == d.class_id {
                cost[(i, j)] = 1.0 - d.box2d.iou(&b);
            }
        }
    }
    Ok(cost)
}

/// Outcome of associating one frame. Every detection index lands in exactly
/// one of `matches`, `new_tracks` or `discarded`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssignmentResult {
    /// (detection index, track id)
    pub matches: Vec<(usize, u64)>,
    pub new_tracks: Vec<usize>,
    pub unmatched_tracks: Vec<u64>,
    /// Unmatched detections scoring below the spawn threshold.
    pub discarded: Vec<usize>,
}

/// Builds the cost matrix for the configured mode, solves the assignment and
/// rejects matches costlier than `1 − gate`.
pub fn associate_frame(
    dets: &[Detection],
    frame: &CameraFrame,
    tracks: &[ObjectTrack],
    cfg: &AssociationConfig,
    shape_mode: ShapeMode,
    samples: usize,
) -> Result<AssignmentResult> {
    let cost = match cfg.mode {
        AssocMode::ThreeD => cost_matrix_3d(dets, frame, tracks)?,
        AssocMode::TwoD => cost_matrix_2d(dets, frame, tracks, shape_mode, samples)?,
    };
    let max_cost = 1.0 - cfg.gate();
    let mut det_matched = vec![false; dets.len()];
    let mut track_matched = vec![false; tracks.len()];
    let mut out = AssignmentResult::default();
    for (i, j) in hungarian(&cost).pairs {
        if cost[(i, j)] <= max_cost {
            det_matched[i] = true;
            track_matched[j] = true;
            out.matches.push((i, tracks[j].track_id));
        }
    }
    for (i, d) in dets.iter().enumerate() {
        if !det_matched[i] {
            if d.score >= cfg.spawn_score {
                out.new_tracks.push(i);
            } else {
                out.discarded.push(i);
            }
        }
    }
    out.unmatched_tracks = tracks
        .iter()
        .zip(&track_matched)
        .filter(|(_, &m)| !m)
        .map(|(t, _)| t.track_id)
        .collect();
    Ok(out)
}
