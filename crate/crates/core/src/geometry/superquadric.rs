use nalgebra::Vector3;

use super::boxes::OrientedBox3D;
use super::pose::RigidPose;
use crate::error::{Error, Result};

pub const ALPHA_MIN: f64 = 0.01;
pub const EPS_MIN: f64 = 0.1;
pub const EPS_MAX: f64 = 1.9;

/// Shape part of a super-quadric: half extents and the two exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub alpha: Vector3<f64>,
    pub eps1: f64,
    pub eps2: f64,
}

impl Shape {
    pub fn new(alpha: Vector3<f64>, eps1: f64, eps2: f64) -> Result<Self> {
        let s = Self { alpha, eps1, eps2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.iter().all(|v| v.is_finite())
            || !self.eps1.is_finite()
            || !self.eps2.is_finite()
        {
            return Err(Error::NonFinite("super-quadric shape"));
        }
        if self.alpha.iter().any(|&a| a < ALPHA_MIN) {
            return Err(Error::InvalidParameter(format!(
                "half extents {:?} below {ALPHA_MIN} m",
                self.alpha.as_slice()
            )));
        }
        for e in [self.eps1, self.eps2] {
            if !(EPS_MIN..=EPS_MAX).contains(&e) {
                return Err(Error::InvalidParameter(format!(
                    "shape exponent {e} outside [{EPS_MIN}, {EPS_MAX}]"
                )));
            }
        }
        Ok(())
    }

    /// Projects onto the admissible bounds.
    pub fn clamped(&self) -> Shape {
        Shape {
            alpha: self.alpha.map(|a| a.max(ALPHA_MIN)),
            eps1: self.eps1.clamp(EPS_MIN, EPS_MAX),
            eps2: self.eps2.clamp(EPS_MIN, EPS_MAX),
        }
    }
}

/// Oriented super-quadric: object-to-world pose plus shape (11 DoF).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperQuadricState {
    pub pose: RigidPose,
    pub shape: Shape,
}

impl SuperQuadricState {
    pub fn new(pose: RigidPose, alpha: Vector3<f64>, eps1: f64, eps2: f64) -> Result<Self> {
        Ok(Self {
            pose,
            shape: Shape::new(alpha, eps1, eps2)?,
        })
    }

    pub fn alpha(&self) -> &Vector3<f64> {
        &self.shape.alpha
    }

    pub fn eps(&self) -> [f64; 2] {
        [self.shape.eps1, self.shape.eps2]
    }

    /// Minimum enclosing oriented box: the object frame with half extents α.
    pub fn enclosing_obb(&self) -> OrientedBox3D {
        OrientedBox3D {
            pose: self.pose,
            half_extents: self.shape.alpha,
        }
    }
}

/// Sign-preserving power `sign(s)·|s|^e`.
#[inline]
pub fn sgnpow(s: f64, e: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(e)
    }
}

/// Canonical-frame inside/outside function: 1 on the surface, < 1 inside.
pub fn implicit_value(shape: &Shape, x: &Vector3<f64>) -> Result<f64> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("query point"));
    }
    shape.validate()?;
    Ok(implicit_unchecked(shape, x))
}

pub(crate) fn implicit_unchecked(shape: &Shape, x: &Vector3<f64>) -> f64 {
    let (e1, e2) = (shape.eps1, shape.eps2);
    let a = &shape.alpha;
    let xy = (x.x.abs() / a.x).powf(2.0 / e2) + (x.y.abs() / a.y).powf(2.0 / e2);
    xy.powf(e2 / e1) + (x.z.abs() / a.z).powf(2.0 / e1)
}

/// Minimum enclosing oriented box of `q`.
pub fn enclosing_obb(q: &SuperQuadricState) -> OrientedBox3D {
    q.enclosing_obb()
}
