//! Sequential vs rayon execution for the two data-parallel hot spots:
//! per-object optimization rounds and Monte-Carlo IoU.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::Vector3;
use quadmap::evaluation::iou3d_montecarlo;
use quadmap::geometry::{project_quadric, OrientedBox3D, RigidPose, SuperQuadricState};
use quadmap::optimizer::{optimize_object, Observation, OptimizerConfig, Trigger};
use quadmap::par::Exec;
use quadmap::simulator::{OrbitSpec, ScenarioSpec};

const POLICIES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

/// Eight objects, each with 50 exact views and a shifted start.
fn jobs() -> Vec<(SuperQuadricState, Vec<Observation>)> {
    let k = ScenarioSpec::with_seed(0).intrinsics;
    (0..8)
        .map(|i| {
            let a = Vector3::new(0.3 + 0.02 * i as f64, 0.25, 0.35);
            let truth = SuperQuadricState::new(
                RigidPose::from_axis_angle(
                    Vector3::new(0.0, 0.0, 0.3 * i as f64),
                    Vector3::new(0.0, 0.0, a.z),
                ),
                a,
                0.3,
                0.8,
            )
            .unwrap();
            let obs = OrbitSpec {
                center: [0.0, 0.0, a.z],
                radius: 4.0,
                height: 1.5,
                height_amplitude: 1.0,
                height_cycles: 3,
                frames: 50,
            }
            .poses()
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(f, cam_pose)| Observation {
                frame_id: f as u64,
                cam_pose,
                intrinsics: k,
                bbox: project_quadric(&truth, &cam_pose, &k, 1000).unwrap(),
            })
            .collect();
            let mut start = truth;
            start.pose = truth
                .pose
                .with_translation(truth.pose.translation() + Vector3::new(0.05, -0.05, 0.0));
            (start, obs)
        })
        .collect()
}

fn optimization_round(c: &mut Criterion) {
    let jobs = jobs();
    let cfg = OptimizerConfig::default();
    let mut group = c.benchmark_group("incremental_round_8_objects");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                exec.map(&jobs, |(start, obs)| {
                    optimize_object(start, obs, None, &cfg, Trigger::Incremental)
                })
            })
        });
    }
    group.finish();
}

fn montecarlo_iou(c: &mut Criterion) {
    let a = OrientedBox3D::new(RigidPose::identity(), Vector3::new(0.5, 0.4, 0.3)).unwrap();
    let b = OrientedBox3D::new(
        RigidPose::from_axis_angle(Vector3::new(0.1, 0.2, 0.7), Vector3::new(0.2, 0.1, 0.0)),
        Vector3::new(0.4, 0.4, 0.4),
    )
    .unwrap();
    let mut group = c.benchmark_group("montecarlo_iou_1e6");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |bch, &exec| {
            bch.iter(|| iou3d_montecarlo(&a, &b, 1_000_000, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, optimization_round, montecarlo_iou);
criterion_main!(benches);
