use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::OrbitSpec;
use crate::error::{Error, Result};
use crate::geometry::{
    CameraIntrinsics, RigidPose, Shape, SuperQuadricState, ALPHA_MIN, EPS_MAX, EPS_MIN,
};
use crate::optimizer::ScalePrior;

/// Placement and shape draws give up after this many rejections.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Size and shape distribution of one object class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    pub class_id: u32,
    pub name: String,
    /// Mean half extents (m).
    pub mu0: [f64; 3],
    /// Half-extent covariance (m²), row major.
    pub sigma0: [[f64; 3]; 3],
    /// Sampling intervals for eps1 and eps2.
    pub eps_range: [[f64; 2]; 2],
}

impl CategorySpec {
    fn diagonal(
        class_id: u32,
        name: &str,
        mu0: [f64; 3],
        std: [f64; 3],
        eps_range: [[f64; 2]; 2],
    ) -> Self {
        let mut sigma0 = [[0.0; 3]; 3];
        for k in 0..3 {
            sigma0[k][k] = std[k] * std[k];
        }
        Self {
            class_id,
            name: name.into(),
            mu0,
            sigma0,
            eps_range,
        }
    }

    /// Furniture-scale defaults: box-like, cylindrical and rounded classes.
    pub fn default_table() -> Vec<CategorySpec> {
        vec![
            Self::diagonal(
                1,
                "chair",
                [0.28, 0.24, 0.45],
                [0.03, 0.03, 0.04],
                [[0.1, 0.3], [0.1, 0.3]],
            ),
            Self::diagonal(
                2,
                "table",
                [0.6, 0.4, 0.37],
                [0.06, 0.05, 0.03],
                [[0.1, 0.2], [0.1, 0.2]],
            ),
            Self::diagonal(
                3,
                "cabinet",
                [0.45, 0.3, 0.5],
                [0.05, 0.04, 0.05],
                [[0.1, 0.3], [0.1, 0.3]],
            ),
            Self::diagonal(
                4,
                "bin",
                [0.26, 0.16, 0.32],
                [0.02, 0.015, 0.03],
                [[0.1, 0.3], [0.9, 1.1]],
            ),
            Self::diagonal(
                5,
                "ottoman",
                [0.36, 0.22, 0.22],
                [0.03, 0.02, 0.02],
                [[0.8, 1.2], [0.9, 1.1]],
            ),
        ]
    }

    pub fn mu0(&self) -> Vector3<f64> {
        Vector3::from(self.mu0)
    }

    pub fn sigma0(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.sigma0[r][c])
    }

    pub fn prior(&self) -> Result<ScalePrior> {
        ScalePrior::new(self.class_id, self.mu0(), self.sigma0())
    }

    pub fn validate(&self) -> Result<()> {
        self.prior()?;
        for r in self.eps_range {
            if !(EPS_MIN <= r[0] && r[0] <= r[1] && r[1] <= EPS_MAX) {
                return Err(Error::InvalidParameter(format!(
                    "class {}: eps range {r:?} must be ordered within [{EPS_MIN}, {EPS_MAX}]",
                    self.class_id
                )));
            }
        }
        Ok(())
    }

    /// Draws half extents from the class Gaussian (rejecting values below the
    /// minimum) and exponents uniformly from the class ranges.
    pub fn sample_shape<R: Rng>(&self, rng: &mut R) -> Result<Shape> {
        let chol = self.sigma0().cholesky().ok_or_else(|| {
            Error::InvalidParameter(format!("class {} covariance not SPD", self.class_id))
        })?;
        let l = chol.l();
        for _ in 0..MAX_ATTEMPTS {
            let z = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            let alpha = self.mu0() + l * z;
            let e1 = uniform(rng, self.eps_range[0]);
            let e2 = uniform(rng, self.eps_range[1]);
            if alpha.iter().all(|&a| a >= ALPHA_MIN) {
                return Shape::new(alpha, e1, e2);
            }
        }
        Err(Error::Placement {
            attempts: MAX_ATTEMPTS,
        })
    }
}

fn uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..range[1])
    }
}

pub fn find_category(categories: &[CategorySpec], class_id: u32) -> Result<&CategorySpec> {
    categories
        .iter()
        .find(|c| c.class_id == class_id)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown class id {class_id}")))
}

/// Floor area objects are placed on, centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomSpec {
    pub half_extent: [f64; 2],
    /// Minimum clearance between object footprint circles (m).
    pub min_gap: f64,
}

impl Default for RoomSpec {
    fn default() -> Self {
        Self {
            half_extent: [2.0, 2.0],
            min_gap: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectCount {
    pub class_id: u32,
    pub count: usize,
}

/// Explicit world-to-camera pose; frame ids follow list order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    /// Unit quaternion [w, x, y, z].
    pub rotation: [f64; 4],
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Orbit(OrbitSpec),
    Poses(Vec<PoseSpec>),
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec::Orbit(OrbitSpec {
            center: [0.0, 0.0, 0.4],
            radius: 4.5,
            height: 1.5,
            height_amplitude: 1.0,
            height_cycles: 3,
            frames: 60,
        })
    }
}

impl TrajectorySpec {
    pub fn poses(&self) -> Result<Vec<RigidPose>> {
        match self {
            TrajectorySpec::Orbit(o) => o.poses(),
            TrajectorySpec::Poses(list) => {
                if list.is_empty() {
                    return Err(Error::Empty("trajectory poses"));
                }
                list.iter()
                    .map(|p| RigidPose::from_quaternion(p.rotation, Vector3::from(p.translation)))
                    .collect()
            }
        }
    }
}

/// Detector noise model. Single-view errors are split into a per-object bias
/// (fraction `bias_fraction` of the variance) and per-frame jitter, so the
/// marginal standard deviations equal the configured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Std of each box corner coordinate (px).
    pub corner_sigma: f64,
    pub dropout: f64,
    /// Per-axis std of the single-view center (m).
    pub center_sigma: f64,
    /// RMS rotation error of the single-view box (degrees).
    pub rotation_sigma_deg: f64,
    /// Relative std of the single-view half extents.
    pub scale_sigma: f64,
    pub bias_fraction: f64,
    pub score_range: [f64; 2],
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            corner_sigma: 20f64.sqrt(),
            dropout: 0.05,
            center_sigma: 0.15,
            rotation_sigma_deg: 10.0,
            scale_sigma: 0.15,
            bias_fraction: 0.8,
            score_range: [0.6, 1.0],
        }
    }
}

impl NoiseSpec {
    /// No noise at all and no dropout.
    pub fn noiseless() -> Self {
        Self {
            corner_sigma: 0.0,
            dropout: 0.0,
            center_sigma: 0.0,
            rotation_sigma_deg: 0.0,
            scale_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("corner_sigma", self.corner_sigma),
            ("center_sigma", self.center_sigma),
            ("rotation_sigma_deg", self.rotation_sigma_deg),
            ("scale_sigma", self.scale_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("dropout", self.dropout),
            ("bias_fraction", self.bias_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        let [lo, hi] = self.score_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "score_range {:?} invalid",
                self.score_range
            )));
        }
        Ok(())
    }
}

fn default_intrinsics() -> CameraIntrinsics {
    CameraIntrinsics {
        fx: 500.0,
        fy: 500.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
    }
}

fn default_objects() -> Vec<ObjectCount> {
    (1..=5)
        .map(|class_id| ObjectCount { class_id, count: 1 })
        .collect()
}

fn default_render_samples() -> usize {
    crate::geometry::DEFAULT_SAMPLES
}

/// Everything needed to generate a synthetic sequence. Only `seed` is
/// required in files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    #[serde(default)]
    pub room: RoomSpec,
    #[serde(default = "default_objects")]
    pub objects: Vec<ObjectCount>,
    #[serde(default)]
    pub trajectory: TrajectorySpec,
    #[serde(default = "default_intrinsics")]
    pub intrinsics: CameraIntrinsics,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Surface samples used to render silhouette boxes.
    #[serde(default = "default_render_samples")]
    pub render_samples: usize,
}

impl ScenarioSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            room: RoomSpec::default(),
            objects: default_objects(),
            trajectory: TrajectorySpec::default(),
            intrinsics: default_intrinsics(),
            noise: NoiseSpec::default(),
            render_samples: default_render_samples(),
        }
    }

    pub fn validate(&self, categories: &[CategorySpec]) -> Result<()> {
        self.intrinsics.validate()?;
        self.noise.validate()?;
        for c in &self.objects {
            find_category(categories, c.class_id)?;
        }
        if !self
            .room
            .half_extent
            .iter()
            .all(|&h| h > 0.0 && h.is_finite())
            || !(self.room.min_gap >= 0.0)
        {
            return Err(Error::InvalidParameter(
                "room extents must be positive".into(),
            ));
        }
        if self.render_samples < crate::geometry::MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                min: crate::geometry::MIN_SAMPLES,
                got: self.render_samples,
            });
        }
        self.trajectory.poses()?;
        Ok(())
    }
}

/// One ground-truth object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtObject {
    pub object_id: u64,
    pub class_id: u32,
    pub state: SuperQuadricState,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub objects: Vec<GtObject>,
}

/// Draws upright objects resting on the floor with uniform yaw and
/// non-overlapping footprints. Deterministic in `spec.seed`.
pub fn generate_scene(spec: &ScenarioSpec, categories: &[CategorySpec]) -> Result<Scene> {
    spec.validate(categories)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [hx, hy] = spec.room.half_extent;
    let mut placed: Vec<(Vector3<f64>, f64)> = Vec::new();
    let mut objects = Vec::new();
    for entry in &spec.objects {
        let cat = find_category(categories, entry.class_id)?;
        for _ in 0..entry.count {
            let shape = cat.sample_shape(&mut rng)?;
            let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let r = shape.alpha.x.hypot(shape.alpha.y);
            let mut spot = None;
            for _ in 0..MAX_ATTEMPTS {
                let x = rng.random_range(-hx..hx);
                let y = rng.random_range(-hy..hy);
                let c = Vector3::new(x, y, shape.alpha.z);
                let inside = x.abs() + r <= hx && y.abs() + r <= hy;
                let clear = placed
                    .iter()
                    .all(|(p, rp)| (p.xy() - c.xy()).norm() > r + rp + spec.room.min_gap);
                if inside && clear {
                    spot = Some(c);
                    break;
                }
            }
            let c = spot.ok_or(Error::Placement {
                attempts: MAX_ATTEMPTS,
            })?;
            placed.push((c, r));
            objects.push(GtObject {
                object_id: objects.len() as u64,
                class_id: cat.class_id,
                state: SuperQuadricState {
                    pose: RigidPose::from_axis_angle(Vector3::new(0.0, 0.0, yaw), c),
                    shape,
                },
            });
        }
    }
    Ok(Scene { objects })
}
