//! Oriented 3D box IoU by convex polytope clipping, plus a Monte-Carlo
//! estimator used as an independent check.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::OrientedBox3D;
use crate::par::Exec;

/// Convex polytope stored as a list of planar faces.
#[derive(Debug, Clone)]
struct Polytope {
    faces: Vec<Vec<Vector3<f64>>>,
}

// corner indices per face; bit k of a corner index is the sign along axis k
const FACES: [[usize; 4]; 6] = [
    [0, 2, 6, 4],
    [1, 5, 7, 3],
    [0, 4, 5, 1],
    [2, 3, 7, 6],
    [0, 1, 3, 2],
    [4, 6, 7, 5],
];

impl Polytope {
    fn from_box(b: &OrientedBox3D) -> Self {
        let c = b.corners();
        Self {
            faces: FACES
                .iter()
                .map(|f| f.iter().map(|&i| c[i]).collect())
                .collect(),
        }
    }

    fn vertices(&self) -> impl Iterator<Item = &Vector3<f64>> {
        self.faces.iter().flatten()
    }

    /// Keeps the part with `n·x ≤ d`.
    fn clip(self, n: &Vector3<f64>, d: f64, tol: f64) -> Polytope {
        let side = |p: &Vector3<f64>| n.dot(p) - d;
        if self.vertices().all(|p| side(p) <= tol) {
            return self;
        }
        if self.vertices().all(|p| side(p) >= -tol) {
            return Polytope { faces: vec![] };
        }
        let mut cap: Vec<Vector3<f64>> = Vec::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        for face in &self.faces {
            let mut out = Vec::with_capacity(face.len() + 2);
            for i in 0..face.len() {
                let p = face[i];
                let q = face[(i + 1) % face.len()];
                let (dp, dq) = (side(&p), side(&q));
                if dp <= tol {
                    out.push(p);
                    if dp.abs() <= tol {
                        cap.push(p);
                    }
                }
                if (dp < -tol && dq > tol) || (dp > tol && dq < -tol) {
                    let x = p + (q - p) * (dp / (dp - dq));
                    out.push(x);
                    cap.push(x);
                }
            }
            if out.len() >= 3 {
                faces.push(out);
            }
        }
        if let Some(cap_face) = order_on_plane(cap, n, tol) {
            faces.push(cap_face);
        }
        Polytope { faces }
    }

    fn volume(&self) -> f64 {
        let (sum, count) = self
            .vertices()
            .fold((Vector3::zeros(), 0usize), |(s, c), v| (s + v, c + 1));
        if count == 0 {
            return 0.0;
        }
        let centroid = sum / count as f64;
        self.faces
            .iter()
            .map(|f| {
                let mut area = Vector3::zeros();
                for i in 0..f.len() {
                    area += f[i].cross(&f[(i + 1) % f.len()]);
                }
                (0.5 * area).dot(&(f[0] - centroid)).abs() / 3.0
            })
            .sum()
    }
}

/// Deduplicates points on a plane and sorts them by angle around their mean.
fn order_on_plane(
    mut pts: Vec<Vector3<f64>>,
    n: &Vector3<f64>,
    tol: f64,
) -> Option<Vec<Vector3<f64>>> {
    let mut unique: Vec<Vector3<f64>> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        if unique.iter().all(|u| (u - p).norm() > tol) {
            unique.push(p);
        }
    }
    if unique.len() < 3 {
        return None;
    }
    let center = unique.iter().sum::<Vector3<f64>>() / unique.len() as f64;
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = n.cross(&helper).normalize();
    let w = n.cross(&u);
    unique.sort_by(|a, b| {
        let (da, db) = (a - center, b - center);
        da.dot(&w)
            .atan2(da.dot(&u))
            .total_cmp(&db.dot(&w).atan2(db.dot(&u)))
    });
    Some(unique)
}

/// Volume of the intersection of two oriented boxes.
pub fn intersection_volume(a: &OrientedBox3D, b: &OrientedBox3D) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let scale = a.half_extents.max().max(b.half_extents.max()) + (a.center() - b.center()).norm();
    let tol = 1e-12 * scale.max(1.0);
    let r = b.pose.rotation();
    let c = b.center();
    let mut poly = Polytope::from_box(a);
    for axis in 0..3 {
        let n = r.column(axis).into_owned();
        let h = b.half_extents[axis];
        poly = poly.clip(&n, n.dot(&c) + h, tol);
        poly = poly.clip(&(-n), -n.dot(&c) + h, tol);
        if poly.faces.is_empty() {
            return Ok(0.0);
        }
    }
    Ok(poly.volume())
}

/// Exact IoU of two oriented boxes.
pub fn iou3d(a: &OrientedBox3D, b: &OrientedBox3D) -> Result<f64> {
    let inter = intersection_volume(a, b)?;
    let union = a.volume() + b.volume() - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

const MC_CHUNK: usize = 1 << 16;

/// Monte-Carlo IoU from `n_samples` uniform points in the union's
/// axis-aligned bound. Deterministic in `seed` for either execution policy.
pub fn iou3d_montecarlo(
    a: &OrientedBox3D,
    b: &OrientedBox3D,
    n_samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    if n_samples < 10_000 {
        return Err(Error::InvalidParameter(
            "Monte-Carlo IoU needs at least 10⁴ samples".into(),
        ));
    }
    let corners: Vec<Vector3<f64>> = a.corners().into_iter().chain(b.corners()).collect();
    let lo = corners
        .iter()
        .fold(Vector3::repeat(f64::INFINITY), |m, c| m.inf(c));
    let hi = corners
        .iter()
        .fold(Vector3::repeat(f64::NEG_INFINITY), |m, c| m.sup(c));
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let counts = exec.map_range(chunks, |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let n = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
        let (mut in_a, mut in_b, mut both) = (0u64, 0u64, 0u64);
        for _ in 0..n {
            let p = Vector3::new(
                rng.random_range(lo.x..=hi.x),
                rng.random_range(lo.y..=hi.y),
                rng.random_range(lo.z..=hi.z),
            );
            let (ia, ib) = (a.contains_point(&p), b.contains_point(&p));
            in_a += ia as u64;
            in_b += ib as u64;
            both += (ia && ib) as u64;
        }
        (in_a, in_b, both)
    });
    let (in_a, in_b, both) = counts
        .into_iter()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
    let union = in_a + in_b - both;
    Ok(if union == 0 {
        0.0
    } else {
        both as f64 / union as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RigidPose;
    use proptest::prelude::*;

    fn cube(center: [f64; 3], yaw: f64, h: f64) -> OrientedBox3D {
        OrientedBox3D::new(
            RigidPose::from_axis_angle(Vector3::new(0.0, 0.0, yaw), Vector3::from(center)),
            Vector3::repeat(h),
        )
        .unwrap()
    }

    #[test]
    fn identical_boxes() {
        let a = cube([0.3, 0.1, 0.0], 0.7, 0.5);
        assert!((iou3d(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_boxes() {
        assert_eq!(
            iou3d(&cube([0.0; 3], 0.0, 0.5), &cube([3.0, 0.0, 0.0], 0.3, 0.5)).unwrap(),
            0.0
        );
    }

    #[test]
    fn half_offset_unit_cubes() {
        let iou = iou3d(&cube([0.0; 3], 0.0, 0.5), &cube([0.5, 0.0, 0.0], 0.0, 0.5)).unwrap();
        assert!((iou - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_cube_octagon() {
        // octagon area of a unit square against itself turned 45°: 2(√2 − 1)
        let inter = 2.0 * (2f64.sqrt() - 1.0);
        let expected = inter / (2.0 - inter);
        let iou = iou3d(
            &cube([0.0; 3], 0.0, 0.5),
            &cube([0.0; 3], std::f64::consts::FRAC_PI_4, 0.5),
        )
        .unwrap();
        assert!((iou - expected).abs() < 1e-12, "{iou}");
        assert!((iou - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.005);
    }

    #[test]
    fn contained_box() {
        let big = cube([0.0; 3], 0.2, 1.0);
        let small = cube([0.1, 0.0, 0.0], 1.0, 0.25);
        let iou = iou3d(&big, &small).unwrap();
        assert!((iou - small.volume() / big.volume()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_box_is_error() {
        let bad = OrientedBox3D {
            pose: RigidPose::identity(),
            half_extents: Vector3::new(1.0, 0.0, 1.0),
        };
        assert!(iou3d(&bad, &cube([0.0; 3], 0.0, 0.5)).is_err());
    }

    #[test]
    fn montecarlo_policies_agree() {
        let a = cube([0.0; 3], 0.0, 0.5);
        let b = cube([0.2, 0.1, 0.0], 0.5, 0.4);
        let s = iou3d_montecarlo(&a, &b, 200_000, 3, Exec::Sequential).unwrap();
        let p = iou3d_montecarlo(&a, &b, 200_000, 3, Exec::Parallel).unwrap();
        assert_eq!(s, p);
        assert!(iou3d_montecarlo(&a, &b, 100, 3, Exec::Sequential).is_err());
    }

    fn arb_box() -> impl Strategy<Value = OrientedBox3D> {
        (
            prop::array::uniform3(-1.0..1.0f64),
            prop::array::uniform3(-3.0..3.0f64),
            prop::array::uniform3(0.1..1.0f64),
        )
            .prop_map(|(c, aa, h)| {
                OrientedBox3D::new(
                    RigidPose::from_axis_angle(Vector3::from(aa), Vector3::from(c)),
                    Vector3::from(h),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn symmetric_bounded_and_rigid_invariant(
            a in arb_box(),
            b in arb_box(),
            aa in prop::array::uniform3(-3.0..3.0f64),
            t in prop::array::uniform3(-5.0..5.0f64),
        ) {
            let ab = iou3d(&a, &b).unwrap();
            let ba = iou3d(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((iou3d(&a, &a).unwrap() - 1.0).abs() < 1e-9);
            let g = RigidPose::from_axis_angle(Vector3::from(aa), Vector3::from(t));
            let moved = iou3d(&a.transformed(&g), &b.transformed(&g)).unwrap();
            prop_assert!((moved - ab).abs() < 1e-9);
        }
    }
}
