//! Rigid transforms, pinhole projection, super-quadric surfaces and the
//! image-box operator.

mod boxes;
mod camera;
mod pose;
mod sampling;
mod superquadric;

pub(crate) use boxes::corner_offset;
pub use boxes::{box_of_points, Box2D, OrientedBox3D};
pub use camera::{project_point, CameraIntrinsics};
pub use pose::{
    exp_so3, nearest_rotation, orthonormality_deviation, rotation_angle_between, skew, RigidPose,
    ORTHONORMAL_TOL,
};
pub use sampling::{sample_surface, SurfaceAngle, SurfaceGrid, DEFAULT_SAMPLES, MIN_SAMPLES};
pub use superquadric::{
    enclosing_obb, implicit_value, sgnpow, Shape, SuperQuadricState, ALPHA_MIN, EPS_MAX, EPS_MIN,
};

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Surface points closer than this to the camera plane make the whole
/// observation unusable.
pub const NEAR_PLANE: f64 = 0.05;

/// Projected image box of a super-quadric seen by a camera with world-to-camera
/// pose `cam`.
pub fn project_quadric(
    q: &SuperQuadricState,
    cam: &RigidPose,
    k: &CameraIntrinsics,
    count: usize,
) -> Result<Box2D> {
    let grid = SurfaceGrid::equal_distance(&q.shape, count)?;
    project_with_grid(q, &grid, cam, k)
}

/// Same as [`project_quadric`] with a precomputed angle grid.
pub fn project_with_grid(
    q: &SuperQuadricState,
    grid: &SurfaceGrid,
    cam: &RigidPose,
    k: &CameraIntrinsics,
) -> Result<Box2D> {
    let to_cam = cam.compose(&q.pose);
    project_canonical(grid.angles().iter().map(|a| a.point(&q.shape)), &to_cam, k)
}

/// Image box of the 8 corners of the oriented box `±alpha` around `q.pose`.
pub fn project_cuboid(
    q: &SuperQuadricState,
    cam: &RigidPose,
    k: &CameraIntrinsics,
) -> Result<Box2D> {
    let to_cam = cam.compose(&q.pose);
    project_canonical((0..8).map(|i| corner_offset(&q.shape.alpha, i)), &to_cam, k)
}

fn project_canonical(
    pts: impl Iterator<Item = Vector3<f64>>,
    to_cam: &RigidPose,
    k: &CameraIntrinsics,
) -> Result<Box2D> {
    let mut b = Box2D {
        xmin: f64::INFINITY,
        xmax: f64::NEG_INFINITY,
        ymin: f64::INFINITY,
        ymax: f64::NEG_INFINITY,
    };
    let mut min_depth = f64::INFINITY;
    for p in pts {
        let c = to_cam.transform(&p);
        min_depth = min_depth.min(c.z);
        if c.z <= NEAR_PLANE {
            continue;
        }
        let uv = k.project_unchecked(&c);
        b.xmin = b.xmin.min(uv.x);
        b.xmax = b.xmax.max(uv.x);
        b.ymin = b.ymin.min(uv.y);
        b.ymax = b.ymax.max(uv.y);
    }
    if min_depth.is_nan() {
        return Err(Error::NonFinite("projected point"));
    }
    if min_depth <= NEAR_PLANE {
        return Err(Error::Visibility { min_depth });
    }
    if !b.xmin.is_finite() {
        return Err(Error::Empty("projected point set"));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 250.0, 250.0, 500, 500).unwrap()
    }

    #[test]
    fn sphere_silhouette_matches_closed_form() {
        let q = SuperQuadricState::new(
            RigidPose::from_translation(Vector3::new(0.0, 0.0, 5.0)),
            Vector3::new(1.0, 1.0, 1.0),
            1.0,
            1.0,
        )
        .unwrap();
        let b = project_quadric(&q, &RigidPose::identity(), &k(), 1000).unwrap();
        let half = 500.0 / 24f64.sqrt();
        let truth = [250.0 - half, 250.0 + half, 250.0 - half, 250.0 + half];
        let got = b.as_array();
        for i in 0..4 {
            let inward = if i % 2 == 0 {
                got[i] - truth[i]
            } else {
                truth[i] - got[i]
            };
            assert!(
                (-1e-9..0.5).contains(&inward),
                "corner {i}: {got:?} vs {truth:?}"
            );
        }
    }

    #[test]
    fn object_behind_camera_is_visibility_error() {
        let q = SuperQuadricState::new(
            RigidPose::from_translation(Vector3::new(0.0, 0.0, -3.0)),
            Vector3::new(0.5, 0.5, 0.5),
            1.0,
            1.0,
        )
        .unwrap();
        let r = project_quadric(&q, &RigidPose::identity(), &k(), 1000);
        assert!(matches!(r, Err(Error::Visibility { .. })));
        // straddling the near plane is rejected as well
        let q2 = SuperQuadricState {
            pose: RigidPose::from_translation(Vector3::new(0.0, 0.0, 0.3)),
            ..q
        };
        assert!(matches!(
            project_quadric(&q2, &RigidPose::identity(), &k(), 1000),
            Err(Error::Visibility { .. })
        ));
    }
}
