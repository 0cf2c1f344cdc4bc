use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RigidPose;

/// World-to-camera pose of a camera at `eye` looking at `target`, with world
/// +z as up (image x right, y down, z forward).
pub fn look_at(eye: &Vector3<f64>, target: &Vector3<f64>) -> Result<RigidPose> {
    let forward = (target - eye)
        .try_normalize(1e-12)
        .ok_or_else(|| Error::InvalidParameter("camera eye coincides with target".into()))?;
    let up = Vector3::z();
    let right = forward
        .cross(&up)
        .try_normalize(1e-9)
        .ok_or_else(|| Error::InvalidParameter("camera looks straight up or down".into()))?;
    let down = forward.cross(&right);
    let cam_to_world = Matrix3::from_columns(&[right, down, forward]);
    let r_cw = cam_to_world.transpose();
    RigidPose::new(r_cw, -(r_cw * eye))
}

/// `frames` cameras evenly spaced on a horizontal circle of `radius` around
/// `center`, raised by `height`, all looking at `center`. The first camera sits
/// on the +x side.
pub fn orbit_trajectory(
    center: &Vector3<f64>,
    radius: f64,
    height: f64,
    frames: usize,
) -> Result<Vec<RigidPose>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(
            "orbit radius must be positive".into(),
        ));
    }
    if frames < 2 {
        return Err(Error::InvalidParameter(
            "orbit needs at least two frames".into(),
        ));
    }
    (0..frames)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / frames as f64;
            let eye = center + Vector3::new(radius * phi.cos(), radius * phi.sin(), height);
            look_at(&eye, center)
        })
        .collect()
}

/// Orbit parameters as written in scenario files. The camera height follows
/// `height + height_amplitude * sin(height_cycles * phi)`, so a non-zero
/// amplitude sweeps the elevation while circling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSpec {
    pub center: [f64; 3],
    pub radius: f64,
    pub height: f64,
    #[serde(default)]
    pub height_amplitude: f64,
    #[serde(default = "default_cycles")]
    pub height_cycles: u32,
    pub frames: usize,
}

fn default_cycles() -> u32 {
    3
}

impl OrbitSpec {
    pub fn poses(&self) -> Result<Vec<RigidPose>> {
        if !self.height_amplitude.is_finite() {
            return Err(Error::NonFinite("orbit height amplitude"));
        }
        let center = Vector3::from(self.center);
        let mut poses = orbit_trajectory(&center, self.radius, self.height, self.frames)?;
        if self.height_amplitude != 0.0 {
            for (i, pose) in poses.iter_mut().enumerate() {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / self.frames as f64;
                let h =
                    self.height + self.height_amplitude * (self.height_cycles as f64 * phi).sin();
                let eye =
                    center + Vector3::new(self.radius * phi.cos(), self.radius * phi.sin(), h);
                *pose = look_at(&eye, &center)?;
            }
        }
        Ok(poses)
    }
}

/// Camera center in world coordinates.
pub fn camera_center(cam: &RigidPose) -> Vector3<f64> {
    *cam.inverse().translation()
}
