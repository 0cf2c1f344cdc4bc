//! Test-only oracles shared by the integration suites. Nothing here calls the
//! library code paths that the oracles check.
#![allow(dead_code)]

use nalgebra::{Matrix3x4, Matrix4, Vector3};
use quadmap::geometry::{CameraIntrinsics, RigidPose, SuperQuadricState};

/// Exact image box of an ellipsoid from its dual conic `C* = P Q* Pᵀ`.
pub fn dual_conic_box(q: &SuperQuadricState, cam: &RigidPose, k: &CameraIntrinsics) -> [f64; 4] {
    let a = q.alpha();
    let q_star_canon = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        a.x * a.x,
        a.y * a.y,
        a.z * a.z,
        -1.0,
    ));
    let mut t = Matrix4::identity();
    t.fixed_view_mut::<3, 3>(0, 0).copy_from(q.pose.rotation());
    t.fixed_view_mut::<3, 1>(0, 3)
        .copy_from(q.pose.translation());
    let q_star = t * q_star_canon * t.transpose();
    let kmat = nalgebra::Matrix3::new(k.fx, 0.0, k.cx, 0.0, k.fy, k.cy, 0.0, 0.0, 1.0);
    let mut rt = Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0).copy_from(cam.rotation());
    rt.fixed_view_mut::<3, 1>(0, 3).copy_from(cam.translation());
    let p = kmat * rt;
    let c = p * q_star * p.transpose();
    // tangent line x = u: C00 - 2u C02 + u² C22 = 0
    let roots = |cii: f64, ci2: f64, c22: f64| {
        let disc = (ci2 * ci2 - cii * c22).sqrt();
        let (r1, r2) = ((ci2 - disc) / c22, (ci2 + disc) / c22);
        (r1.min(r2), r1.max(r2))
    };
    let (x0, x1) = roots(c[(0, 0)], c[(0, 2)], c[(2, 2)]);
    let (y0, y1) = roots(c[(1, 1)], c[(1, 2)], c[(2, 2)]);
    [x0, x1, y0, y1]
}

/// Coefficient of variation of nearest-neighbour distances (brute force).
pub fn nn_spacing_cv(pts: &[Vector3<f64>]) -> f64 {
    let nn: Vec<f64> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let n = nn.len() as f64;
    let mean = nn.iter().sum::<f64>() / n;
    let var = nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Central finite-difference step used by the gradient checks.
pub const FD_STEP: f64 = 1e-5;

use quadmap::geometry::project_quadric;
use quadmap::optimizer::{Observation, ParamVector, PARAM_DIM};
use quadmap::simulator::OrbitSpec;

pub fn default_intrinsics() -> CameraIntrinsics {
    CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap()
}

/// Exact projected boxes of `q` from an orbit around its center. The camera
/// height swings by `amplitude` three times per revolution.
pub fn orbit_observations(
    q: &SuperQuadricState,
    frames: usize,
    radius: f64,
    height: f64,
    amplitude: f64,
) -> Vec<Observation> {
    let k = default_intrinsics();
    let t = q.pose.translation();
    OrbitSpec {
        center: [t.x, t.y, t.z],
        radius,
        height,
        height_amplitude: amplitude,
        height_cycles: 3,
        frames,
    }
    .poses()
    .unwrap()
    .into_iter()
    .enumerate()
    .map(|(i, cam_pose)| Observation {
        frame_id: i as u64,
        cam_pose,
        intrinsics: k,
        bbox: project_quadric(q, &cam_pose, &k, 1000).unwrap(),
    })
    .collect()
}

/// Applies a raw 11-vector perturbation directly (translation add, left
/// rotation, shape add) without clamping.
pub fn perturb(q: &SuperQuadricState, d: &ParamVector) -> SuperQuadricState {
    let mut out = *q;
    out.pose = q
        .pose
        .rotate_left(&Vector3::new(d[3], d[4], d[5]))
        .with_translation(q.pose.translation() + Vector3::new(d[0], d[1], d[2]));
    for k in 0..3 {
        out.shape.alpha[k] += d[6 + k];
    }
    out.shape.eps1 += d[9];
    out.shape.eps2 += d[10];
    out
}

/// Unit vector along parameter `i`.
pub fn unit(i: usize) -> ParamVector {
    let mut e = ParamVector::zeros();
    assert!(i < PARAM_DIM);
    e[i] = 1.0;
    e
}
