//! Exact box IoU against its Monte-Carlo estimate.

use nalgebra::Vector3;
use quadmap::evaluation::{intersection_volume, iou3d, iou3d_montecarlo};
use quadmap::geometry::{OrientedBox3D, RigidPose};
use quadmap::par::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_box(rng: &mut ChaCha8Rng) -> OrientedBox3D {
    OrientedBox3D::new(
        RigidPose::from_axis_angle(
            Vector3::from_fn(|_, _| rng.random_range(-3.0..3.0)),
            Vector3::from_fn(|_, _| rng.random_range(-0.4..0.4)),
        ),
        Vector3::from_fn(|_, _| rng.random_range(0.2..1.0)),
    )
    .unwrap()
}

fn aabb_volume(a: &OrientedBox3D, b: &OrientedBox3D) -> f64 {
    let pts: Vec<Vector3<f64>> = a.corners().into_iter().chain(b.corners()).collect();
    let lo = pts
        .iter()
        .fold(Vector3::repeat(f64::INFINITY), |m, p| m.inf(p));
    let hi = pts
        .iter()
        .fold(Vector3::repeat(f64::NEG_INFINITY), |m, p| m.sup(p));
    (hi - lo).product()
}

#[test]
fn montecarlo_agrees_within_three_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let n = 200_000;
    for seed in 0..20 {
        let (a, b) = (random_box(&mut rng), random_box(&mut rng));
        let exact = iou3d(&a, &b).unwrap();
        let union = a.volume() + b.volume() - intersection_volume(&a, &b).unwrap();
        // given the samples that land in the union, the hit count is binomial
        let in_union = n as f64 * union / aabb_volume(&a, &b);
        let se = (exact * (1.0 - exact) / in_union).sqrt();
        let mc = iou3d_montecarlo(&a, &b, n, seed, Exec::Parallel).unwrap();
        assert!(
            (mc - exact).abs() <= 3.0 * se.max(1e-4),
            "pair {seed}: exact {exact} mc {mc} se {se}"
        );
    }
}

#[test]
fn identical_and_disjoint_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let a = random_box(&mut rng);
    assert!((iou3d_montecarlo(&a, &a, 1_000_000, 1, Exec::Parallel).unwrap() - 1.0).abs() <= 0.005);
    let far = OrientedBox3D::new(
        a.pose.with_translation(Vector3::new(10.0, 0.0, 0.0)),
        a.half_extents,
    )
    .unwrap();
    assert_eq!(
        iou3d_montecarlo(&a, &far, 100_000, 1, Exec::Parallel).unwrap(),
        0.0
    );
    assert_eq!(iou3d(&a, &far).unwrap(), 0.0);
}
