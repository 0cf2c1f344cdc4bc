use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole intrinsics (no distortion).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("camera intrinsics"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 || self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "intrinsics need positive focal lengths and image size, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Perspective projection of a camera-frame point.
    pub fn project(&self, x_cam: &Vector3<f64>) -> Result<Vector2<f64>> {
        if x_cam.z <= 0.0 {
            return Err(Error::BehindCamera { depth: x_cam.z });
        }
        Ok(self.project_unchecked(x_cam))
    }

    #[inline]
    pub(crate) fn project_unchecked(&self, x: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(self.fx * x.x / x.z + self.cx, self.fy * x.y / x.z + self.cy)
    }

    /// Image rectangle as a box.
    pub fn image_box(&self) -> super::Box2D {
        super::Box2D {
            xmin: 0.0,
            xmax: self.width as f64,
            ymin: 0.0,
            ymax: self.height as f64,
        }
    }
}

/// Free-function form of [`CameraIntrinsics::project`].
pub fn project_point(k: &CameraIntrinsics, x_cam: &Vector3<f64>) -> Result<Vector2<f64>> {
    k.project(x_cam)
}
