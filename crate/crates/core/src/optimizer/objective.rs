//! Negative log posterior over the 11 parameters and its analytic subgradient.
//!
//! Parameter layout: `[t (3), δ (3), α (3), ε1, ε2]` where `δ` is a rotation
//! increment composed on the left of the current object-to-world rotation.
//! The box operator is differentiated through its argmin/argmax samples with
//! the surface angles held fixed (ties go to the lowest sample index).

use nalgebra::{Matrix3, SVector, Vector3};

use super::config::{OptimizerConfig, ShapeMode};
use super::prior::ScalePrior;
use crate::error::{Error, Result};
use crate::geometry::{
    corner_offset, Box2D, CameraIntrinsics, RigidPose, SuperQuadricState, SurfaceAngle,
    SurfaceGrid, NEAR_PLANE,
};

pub const PARAM_DIM: usize = 11;
pub type ParamVector = SVector<f64, PARAM_DIM>;

/// One associated 2D detection with its camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub frame_id: u64,
    /// World-to-camera pose.
    pub cam_pose: RigidPose,
    pub intrinsics: CameraIntrinsics,
    pub bbox: Box2D,
}

/// Largest accepted box coordinate magnitude, px.
pub const MAX_BOX_COORD: f64 = 1e6;

impl Observation {
    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        if self.bbox.as_array().iter().any(|v| v.abs() > MAX_BOX_COORD) {
            return Err(Error::InvalidParameter(format!(
                "box {:?} outside the sanity range",
                self.bbox
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub data: f64,
    pub prior: f64,
    /// Observations rejected because the volume reached the camera near plane.
    pub skipped: usize,
}

/// Canonical points a volume is projected from.
#[derive(Debug, Clone)]
pub enum Surface {
    Samples(SurfaceGrid),
    Corners,
}

impl Surface {
    /// The surface appropriate for `q` under `cfg`'s shape mode.
    pub fn for_state(q: &SuperQuadricState, cfg: &OptimizerConfig) -> Result<Surface> {
        match cfg.shape_mode {
            ShapeMode::Cuboid => Ok(Surface::Corners),
            _ => Ok(Surface::Samples(SurfaceGrid::equal_distance(
                &q.shape,
                cfg.sample_count,
            )?)),
        }
    }
}

/// Indices of the points realizing `[xmin, xmax, ymin, ymax]`.
pub type Extremes = [usize; 4];

pub struct Objective<'a> {
    obs: &'a [Observation],
    prior: Option<&'a ScalePrior>,
    cfg: &'a OptimizerConfig,
}

impl<'a> Objective<'a> {
    /// `prior` is ignored when the configuration disables it.
    pub fn new(
        obs: &'a [Observation],
        prior: Option<&'a ScalePrior>,
        cfg: &'a OptimizerConfig,
    ) -> Self {
        Self {
            obs,
            prior: prior.filter(|_| cfg.prior_enabled),
            cfg,
        }
    }

    pub fn value(&self, q: &SuperQuadricState) -> Result<ObjectiveValue> {
        let surface = Surface::for_state(q, self.cfg)?;
        self.value_on(q, &surface)
    }

    pub fn value_on(&self, q: &SuperQuadricState, surface: &Surface) -> Result<ObjectiveValue> {
        Ok(self.run(q, surface, false)?.0)
    }

    pub fn gradient(&self, q: &SuperQuadricState) -> Result<(ObjectiveValue, ParamVector)> {
        let surface = Surface::for_state(q, self.cfg)?;
        self.gradient_on(q, &surface)
    }

    pub fn gradient_on(
        &self,
        q: &SuperQuadricState,
        surface: &Surface,
    ) -> Result<(ObjectiveValue, ParamVector)> {
        let (v, g) = self.run(q, surface, true)?;
        Ok((v, self.mask(g)))
    }

    /// Per observation, the extreme point indices (None when skipped).
    pub fn extremes_on(&self, q: &SuperQuadricState, surface: &Surface) -> Vec<Option<Extremes>> {
        let pts = canonical_points(q, surface);
        self.obs
            .iter()
            .map(|o| project_extremes(q, &pts, o).ok().map(|p| p.index))
            .collect()
    }

    /// Zeroes the components the shape mode and rotation settings freeze.
    pub fn mask(&self, mut g: ParamVector) -> ParamVector {
        if matches!(
            self.cfg.shape_mode,
            ShapeMode::Ellipsoid | ShapeMode::Cuboid
        ) {
            g[9] = 0.0;
            g[10] = 0.0;
        }
        if self.cfg.freeze_roll_pitch {
            g[3] = 0.0;
            g[4] = 0.0;
        }
        g
    }

    fn run(
        &self,
        q: &SuperQuadricState,
        surface: &Surface,
        want_grad: bool,
    ) -> Result<(ObjectiveValue, ParamVector)> {
        let inv_sigma2 = 1.0 / self.cfg.sigma2;
        let mut grad = ParamVector::zeros();
        let mut data = 0.0;
        let mut skipped = 0;
        let pts = canonical_points(q, surface);
        for o in self.obs {
            let proj = match project_extremes(q, &pts, o) {
                Ok(p) => p,
                Err(Error::Visibility { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let detected = o.bbox.as_array();
            for (c, &corner) in detected.iter().enumerate() {
                let r = corner - proj.value[c];
                data += 0.5 * r * r * inv_sigma2;
                if want_grad {
                    let d = point_jacobian(q, surface, &pts, o, proj.index[c], c);
                    grad -= d * (r * inv_sigma2);
                }
            }
        }
        if skipped == self.obs.len() {
            return Err(Error::NoUsableObservations);
        }
        let mut prior = 0.0;
        if let Some(p) = self.prior {
            let (e, g) = p.energy(q.alpha());
            prior = e;
            if want_grad {
                for k in 0..3 {
                    grad[6 + k] += g[k];
                }
            }
        }
        if !(data + prior).is_finite() {
            return Err(Error::NonFinite("objective"));
        }
        Ok((
            ObjectiveValue {
                value: data + prior,
                data,
                prior,
                skipped,
            },
            grad,
        ))
    }
}

struct Projected {
    value: [f64; 4],
    index: Extremes,
}

fn canonical_points(q: &SuperQuadricState, surface: &Surface) -> Vec<Vector3<f64>> {
    match surface {
        Surface::Samples(grid) => grid.points(&q.shape),
        Surface::Corners => (0..8).map(|i| corner_offset(&q.shape.alpha, i)).collect(),
    }
}

fn project_extremes(
    q: &SuperQuadricState,
    pts: &[Vector3<f64>],
    o: &Observation,
) -> Result<Projected> {
    let to_cam = o.cam_pose.compose(&q.pose);
    let (r, t) = (to_cam.rotation(), to_cam.translation());
    let k = &o.intrinsics;
    let mut value = [
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    ];
    let mut index = [0; 4];
    let mut min_depth = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        let c = r * p + t;
        if !(c.z > NEAR_PLANE) {
            min_depth = min_depth.min(c.z);
            continue;
        }
        let u = k.fx * c.x / c.z + k.cx;
        let v = k.fy * c.y / c.z + k.cy;
        if u < value[0] {
            value[0] = u;
            index[0] = i;
        }
        if u > value[1] {
            value[1] = u;
            index[1] = i;
        }
        if v < value[2] {
            value[2] = v;
            index[2] = i;
        }
        if v > value[3] {
            value[3] = v;
            index[3] = i;
        }
    }
    if min_depth.is_nan() {
        return Err(Error::NonFinite("camera-frame point"));
    }
    if min_depth <= NEAR_PLANE {
        return Err(Error::Visibility { min_depth });
    }
    Ok(Projected { value, index })
}

/// d(corner coordinate `c` of the projection of point `i`)/dθ.
fn point_jacobian(
    q: &SuperQuadricState,
    surface: &Surface,
    pts: &[Vector3<f64>],
    o: &Observation,
    i: usize,
    c: usize,
) -> ParamVector {
    let x_obj = pts[i];
    let r_wo: &Matrix3<f64> = q.pose.rotation();
    let a = r_wo * x_obj;
    let p_w = a + q.pose.translation();
    let p_c = o.cam_pose.transform(&p_w);
    let k = &o.intrinsics;
    let z = p_c.z;
    // gradient of the image coordinate w.r.t. the camera-frame point
    let g_c = if c < 2 {
        Vector3::new(k.fx / z, 0.0, -k.fx * p_c.x / (z * z))
    } else {
        Vector3::new(0.0, k.fy / z, -k.fy * p_c.y / (z * z))
    };
    let g_w = o.cam_pose.rotation().transpose() * g_c;
    let g_o = r_wo.transpose() * g_w;

    let mut d = ParamVector::zeros();
    d.fixed_rows_mut::<3>(0).copy_from(&g_w);
    d.fixed_rows_mut::<3>(3).copy_from(&a.cross(&g_w));
    let alpha = &q.shape.alpha;
    for k in 0..3 {
        d[6 + k] = g_o[k] * x_obj[k] / alpha[k];
    }
    if let Surface::Samples(grid) = surface {
        let ang: &SurfaceAngle = &grid.angles()[i];
        let xl = |coord: f64, s: f64| {
            if coord == 0.0 {
                0.0
            } else {
                coord * s.abs().ln()
            }
        };
        let de1 = Vector3::new(
            xl(x_obj.x, ang.cos_eta),
            xl(x_obj.y, ang.cos_eta),
            xl(x_obj.z, ang.sin_eta),
        );
        let de2 = Vector3::new(xl(x_obj.x, ang.cos_omega), xl(x_obj.y, ang.sin_omega), 0.0);
        d[9] = g_o.dot(&de1);
        d[10] = g_o.dot(&de2);
    }
    d
}

/// Objective value at `q` with a freshly sampled surface.
pub fn neg_log_posterior(
    q: &SuperQuadricState,
    obs: &[Observation],
    prior: Option<&ScalePrior>,
    cfg: &OptimizerConfig,
) -> Result<ObjectiveValue> {
    Objective::new(obs, prior, cfg).value(q)
}

/// Analytic subgradient at `q` with a freshly sampled surface.
pub fn gradient(
    q: &SuperQuadricState,
    obs: &[Observation],
    prior: Option<&ScalePrior>,
    cfg: &OptimizerConfig,
) -> Result<ParamVector> {
    Ok(Objective::new(obs, prior, cfg).gradient(q)?.1)
}
