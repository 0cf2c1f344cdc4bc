use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{nearest_rotation, OrientedBox3D, RigidPose, Shape, SuperQuadricState};

/// Average of single-view world-frame boxes: mean center, chordal mean
/// rotation, mean half extents, unit exponents.
pub fn initialize(boxes: &[OrientedBox3D]) -> Result<SuperQuadricState> {
    if boxes.is_empty() {
        return Err(Error::Empty("single-view boxes"));
    }
    let n = boxes.len() as f64;
    let center = boxes.iter().map(|b| b.center()).sum::<Vector3<f64>>() / n;
    let rot_sum = boxes
        .iter()
        .map(|b| *b.pose.rotation())
        .sum::<Matrix3<f64>>()
        / n;
    let alpha = boxes.iter().map(|b| b.half_extents).sum::<Vector3<f64>>() / n;
    let rotation = if boxes.len() == 1 {
        *boxes[0].pose.rotation()
    } else {
        nearest_rotation(&rot_sum)
    };
    let shape = Shape {
        alpha,
        eps1: 1.0,
        eps2: 1.0,
    }
    .clamped();
    Ok(SuperQuadricState {
        pose: RigidPose::new(rotation, center)?,
        shape,
    })
}
