use std::collections::BTreeMap;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::scene::{GtObject, ScenarioSpec, Scene};
use crate::association::{CameraFrame, Detection, DetectionKey};
use crate::error::{Error, Result};
use crate::geometry::{project_quadric, Box2D, OrientedBox3D};
use crate::par::Exec;

const BIAS_STREAM: u64 = 1;
const FRAME_STREAM_BASE: u64 = 2;

/// One rendered image: its camera and the detections it produced, with the
/// true object id of each detection alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFrame {
    pub frame: CameraFrame,
    pub detections: Vec<Detection>,
    pub object_ids: Vec<u64>,
}

/// True objects plus the true object of every detection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub objects: Vec<GtObject>,
    pub detection_objects: BTreeMap<DetectionKey, u64>,
}

impl GroundTruth {
    pub fn new(scene: &Scene, frames: &[RenderedFrame]) -> Self {
        let mut detection_objects = BTreeMap::new();
        for f in frames {
            for (i, &o) in f.object_ids.iter().enumerate() {
                detection_objects.insert((f.frame.frame_id, i), o);
            }
        }
        Self {
            objects: scene.objects.clone(),
            detection_objects,
        }
    }
}

/// Per-object single-view error terms in units of the configured stds.
#[derive(Debug, Clone, Copy)]
struct Unit {
    center: Vector3<f64>,
    rotation: Vector3<f64>,
    scale: Vector3<f64>,
}

impl Unit {
    fn draw<R: Rng>(rng: &mut R) -> Self {
        let mut v = || Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        Self {
            center: v(),
            rotation: v(),
            scale: v(),
        }
    }
}

/// Renders noisy detections for every frame of the trajectory.
///
/// Each frame draws from its own generator stream, so frames can be rendered
/// in any order or in parallel with identical results.
pub fn render_detections(
    scene: &Scene,
    spec: &ScenarioSpec,
    exec: Exec,
) -> Result<Vec<RenderedFrame>> {
    spec.noise.validate()?;
    let poses = spec.trajectory.poses()?;
    let mut bias_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    bias_rng.set_stream(BIAS_STREAM);
    let biases: Vec<Unit> = scene
        .objects
        .iter()
        .map(|_| Unit::draw(&mut bias_rng))
        .collect();
    let frames: Vec<Result<RenderedFrame>> = exec.map_range(poses.len(), |i| {
        let frame = CameraFrame {
            frame_id: i as u64,
            pose: poses[i],
            intrinsics: spec.intrinsics,
        };
        render_frame(scene, spec, &biases, frame)
    });
    frames.into_iter().collect()
}

fn render_frame(
    scene: &Scene,
    spec: &ScenarioSpec,
    biases: &[Unit],
    frame: CameraFrame,
) -> Result<RenderedFrame> {
    let noise = &spec.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(FRAME_STREAM_BASE + frame.frame_id);
    let (wb, wj) = (
        noise.bias_fraction.sqrt(),
        (1.0 - noise.bias_fraction).sqrt(),
    );
    let image = frame.intrinsics.image_box();
    let mut out = RenderedFrame {
        frame,
        detections: vec![],
        object_ids: vec![],
    };
    for (obj, bias) in scene.objects.iter().zip(biases) {
        // fixed draw order per object keeps streams aligned whatever is visible
        let corner: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
        let dropped = rng.random::<f64>() < noise.dropout;
        let score = lerp(noise.score_range, rng.random::<f64>());
        let jitter = Unit::draw(&mut rng);

        let true_box = match project_quadric(
            &obj.state,
            &frame.pose,
            &frame.intrinsics,
            spec.render_samples,
        ) {
            Ok(b) => b,
            Err(Error::Visibility { .. }) => continue,
            Err(e) => return Err(e),
        };
        if dropped || true_box.intersection_area(&image) <= 0.0 {
            continue;
        }
        let [x0, x1, y0, y1] = true_box.as_array();
        let s = noise.corner_sigma;
        let (xa, xb) = (x0 + s * corner[0], x1 + s * corner[1]);
        let (ya, yb) = (y0 + s * corner[2], y1 + s * corner[3]);
        let box2d = Box2D::new(xa.min(xb), xa.max(xb), ya.min(yb), ya.max(yb))?;

        let mix = |b: Vector3<f64>, j: Vector3<f64>| wb * b + wj * j;
        let world = obj.state.enclosing_obb();
        let center = world.center() + noise.center_sigma * mix(bias.center, jitter.center);
        let rot_std = noise.rotation_sigma_deg.to_radians() / 3f64.sqrt();
        let pose = world
            .pose
            .rotate_left(&(rot_std * mix(bias.rotation, jitter.rotation)))
            .with_translation(center);
        let factor = (Vector3::repeat(1.0) + noise.scale_sigma * mix(bias.scale, jitter.scale))
            .map(|f| f.max(0.2));
        let sv_world = OrientedBox3D::new(pose, world.half_extents.component_mul(&factor))?;
        out.detections.push(Detection {
            frame_id: frame.frame_id,
            box2d,
            class_id: obj.class_id,
            score,
            sv3d: Some(sv_world.transformed(&frame.pose)),
        });
        out.object_ids.push(obj.object_id);
    }
    Ok(out)
}

fn lerp(range: [f64; 2], u: f64) -> f64 {
    range[0] + (range[1] - range[0]) * u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::scene::{generate_scene, CategorySpec, NoiseSpec, ObjectCount};
    use crate::simulator::OrbitSpec;
    use crate::simulator::TrajectorySpec;

    fn spec(seed: u64) -> ScenarioSpec {
        let mut s = ScenarioSpec::with_seed(seed);
        s.trajectory = TrajectorySpec::Orbit(OrbitSpec {
            center: [0.0, 0.0, 0.4],
            radius: 6.0,
            height: 1.5,
            height_amplitude: 1.0,
            height_cycles: 3,
            frames: 12,
        });
        s
    }

    #[test]
    fn noiseless_boxes_equal_projection() {
        let mut s = spec(3);
        s.noise = NoiseSpec::noiseless();
        let cats = CategorySpec::default_table();
        let scene = generate_scene(&s, &cats).unwrap();
        let frames = render_detections(&scene, &s, Exec::Sequential).unwrap();
        let mut n = 0;
        for f in &frames {
            for (d, &o) in f.detections.iter().zip(&f.object_ids) {
                let q = &scene.objects[o as usize].state;
                let b = project_quadric(q, &f.frame.pose, &f.frame.intrinsics, 1000).unwrap();
                assert_eq!(d.box2d, b);
                let sv = d.sv3d.unwrap().transformed(&f.frame.pose.inverse());
                assert!((sv.center() - q.pose.translation()).norm() < 1e-9);
                n += 1;
            }
        }
        assert_eq!(n, 12 * 5);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let s = spec(4);
        let scene = generate_scene(&s, &CategorySpec::default_table()).unwrap();
        let a = render_detections(&scene, &s, Exec::Sequential).unwrap();
        let b = render_detections(&scene, &s, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn object_behind_camera_is_not_detected() {
        let mut s = spec(1);
        s.noise = NoiseSpec::noiseless();
        s.objects = vec![ObjectCount {
            class_id: 1,
            count: 1,
        }];
        // single camera at the origin looking along +x, object placed behind it
        let look =
            crate::simulator::look_at(&Vector3::new(0.0, 0.0, 0.4), &Vector3::new(1.0, 0.0, 0.4))
                .unwrap();
        let q = look.quaternion();
        let t = look.translation();
        s.trajectory = TrajectorySpec::Poses(vec![crate::simulator::PoseSpec {
            rotation: q,
            translation: [t.x, t.y, t.z],
        }]);
        let mut scene = generate_scene(&s, &CategorySpec::default_table()).unwrap();
        let mut obj = scene.objects[0];
        obj.state.pose = obj
            .state
            .pose
            .with_translation(Vector3::new(-3.0, 0.0, 0.45));
        scene.objects[0] = obj;
        let frames = render_detections(&scene, &s, Exec::Sequential).unwrap();
        assert!(frames[0].detections.is_empty());
        scene.objects[0].state.pose = obj
            .state
            .pose
            .with_translation(Vector3::new(3.0, 0.0, 0.45));
        let frames = render_detections(&scene, &s, Exec::Sequential).unwrap();
        assert_eq!(frames[0].detections.len(), 1);
    }

    #[test]
    fn ground_truth_indexes_every_detection() {
        let s = spec(8);
        let scene = generate_scene(&s, &CategorySpec::default_table()).unwrap();
        let frames = render_detections(&scene, &s, Exec::Sequential).unwrap();
        let gt = GroundTruth::new(&scene, &frames);
        let total: usize = frames.iter().map(|f| f.detections.len()).sum();
        assert_eq!(gt.detection_objects.len(), total);
    }
}
