use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Tolerance on `RᵀR − I` and `det R − 1` accepted at construction.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Rigid transform `x ↦ R·x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Default for RigidPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidPose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose, rejecting rotations that are not proper orthonormal.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation
            .iter()
            .chain(translation.iter())
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("rigid pose"));
        }
        let deviation = orthonormality_deviation(&rotation);
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Pose from a unit quaternion given as `[w, x, y, z]`.
    pub fn from_quaternion(wxyz: [f64; 4], translation: Vector3<f64>) -> Result<Self> {
        let norm = wxyz.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "quaternion norm {norm} is not 1"
            )));
        }
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
            wxyz[0], wxyz[1], wxyz[2], wxyz[3],
        ));
        Self::new(*q.to_rotation_matrix().matrix(), translation)
    }

    /// Rotation about `axis` by `|axis|` radians.
    pub fn from_axis_angle(axis_angle: Vector3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: exp_so3(&axis_angle),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// Unit quaternion `[w, x, y, z]` with non-negative `w`.
    pub fn quaternion(&self) -> [f64; 4] {
        let q =
            UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.rotation));
        let s = if q.w < 0.0 { -1.0 } else { 1.0 };
        [s * q.w, s * q.i, s * q.j, s * q.k]
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidPose) -> RigidPose {
        RigidPose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidPose {
        let rt = self.rotation.transpose();
        RigidPose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * x + self.translation
    }

    /// Left-multiplies the rotation by `exp([delta]ₓ)` and re-orthonormalizes.
    pub fn rotate_left(&self, delta: &Vector3<f64>) -> RigidPose {
        RigidPose {
            rotation: nearest_rotation(&(exp_so3(delta) * self.rotation)),
            translation: self.translation,
        }
    }

    pub fn with_translation(&self, translation: Vector3<f64>) -> RigidPose {
        RigidPose {
            rotation: self.rotation,
            translation,
        }
    }
}

/// max(|RᵀR − I|∞, |det R − 1|).
pub fn orthonormality_deviation(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r - Matrix3::identity();
    let max_entry = gram.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    max_entry.max((r.determinant() - 1.0).abs())
}

/// Rodrigues' formula.
pub fn exp_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = skew(w);
    if theta < 1e-12 {
        return Matrix3::identity() + k;
    }
    let a = theta.sin() / theta;
    let b = (1.0 - theta.cos()) / (theta * theta);
    Matrix3::identity() + k * a + k * k * b
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Orthogonal polar factor of `m`, forced to determinant +1.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        // singular values are sorted descending; flip the weakest direction
        let col = u.column(2) * -1.0;
        u.set_column(2, &col);
        r = u * v_t;
    }
    r
}

/// Angle of the relative rotation between two rotation matrices.
pub fn rotation_angle_between(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let rel = a.transpose() * b;
    ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &Matrix3<f64>) -> f64 {
        m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    #[test]
    fn compose_identity_is_noop() {
        let p =
            RigidPose::from_axis_angle(Vector3::new(0.3, -0.2, 0.9), Vector3::new(1.0, 2.0, 3.0));
        let q = RigidPose::identity().compose(&p);
        assert!(max_abs(&(q.rotation() - p.rotation())) < 1e-15);
        assert_eq!(q.translation(), p.translation());
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let p =
            RigidPose::from_axis_angle(Vector3::new(1.1, 0.4, -2.0), Vector3::new(-4.0, 0.5, 7.0));
        let id = p.compose(&p.inverse());
        assert!(max_abs(&(id.rotation() - Matrix3::identity())) < 1e-9);
        assert!(id.translation().norm() < 1e-9);
    }

    #[test]
    fn translation_only_moves_origin() {
        let p = RigidPose::from_translation(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(p.transform(&Vector3::zeros()), Vector3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn rejects_non_orthonormal() {
        let m = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            RigidPose::new(m, Vector3::zeros()),
            Err(Error::NotOrthonormal { .. })
        ));
        let reflect = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(RigidPose::new(reflect, Vector3::zeros()).is_err());
    }

    #[test]
    fn quaternion_round_trip() {
        let p = RigidPose::from_axis_angle(Vector3::new(0.2, 1.3, -0.7), Vector3::zeros());
        let q = p.quaternion();
        let back = RigidPose::from_quaternion(q, Vector3::zeros()).unwrap();
        assert!(max_abs(&(back.rotation() - p.rotation())) < 1e-12);
    }

    #[test]
    fn nearest_rotation_fixes_drift() {
        let r = exp_so3(&Vector3::new(0.5, 0.1, 0.2)) + Matrix3::repeat(1e-4);
        let fixed = nearest_rotation(&r);
        assert!(orthonormality_deviation(&fixed) < 1e-12);
    }
}
