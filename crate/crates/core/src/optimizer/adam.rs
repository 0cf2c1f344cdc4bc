use nalgebra::Vector3;

use super::config::{OptimizerConfig, ShapeMode};
use super::objective::{ParamVector, PARAM_DIM};
use crate::error::{Error, Result};
use crate::geometry::{Shape, SuperQuadricState};

/// Adam moment state over a fixed-length parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(dim: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            beta1,
            beta2,
            epsilon,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn from_config(cfg: &OptimizerConfig) -> Self {
        Self::new(PARAM_DIM, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon)
    }

    pub fn steps_taken(&self) -> i32 {
        self.t
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    /// Bias-corrected update `−lr·m̂/(√v̂ + ε)` to be added to the parameters.
    pub fn step(&mut self, grad: &[f64], lr: &[f64]) -> Result<Vec<f64>> {
        if grad.len() != self.m.len() || lr.len() != self.m.len() {
            return Err(Error::InvalidParameter(format!(
                "adam dimension mismatch: state {}, grad {}, lr {}",
                self.m.len(),
                grad.len(),
                lr.len()
            )));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        let mut delta = vec![0.0; grad.len()];
        for i in 0..grad.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            delta[i] = -lr[i] * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(delta)
    }
}

/// Applies an 11-parameter update: translation added, rotation increment
/// folded in on the left, shape clamped to its bounds.
pub fn apply_update(q: &SuperQuadricState, delta: &[f64], mode: ShapeMode) -> SuperQuadricState {
    let t = q.pose.translation() + Vector3::new(delta[0], delta[1], delta[2]);
    let pose = q
        .pose
        .rotate_left(&Vector3::new(delta[3], delta[4], delta[5]))
        .with_translation(t);
    let mut shape = Shape {
        alpha: q.shape.alpha + Vector3::new(delta[6], delta[7], delta[8]),
        eps1: q.shape.eps1 + delta[9],
        eps2: q.shape.eps2 + delta[10],
    }
    .clamped();
    if mode == ShapeMode::Ellipsoid {
        shape.eps1 = 1.0;
        shape.eps2 = 1.0;
    }
    SuperQuadricState { pose, shape }
}

/// One Adam step on a super-quadric.
pub fn adam_step(
    q: &SuperQuadricState,
    adam: &mut Adam,
    grad: &ParamVector,
    lr: &[f64; PARAM_DIM],
    mode: ShapeMode,
) -> Result<SuperQuadricState> {
    let delta = adam.step(grad.as_slice(), lr)?;
    Ok(apply_update(q, &delta, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{orthonormality_deviation, RigidPose};

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = Adam::new(3, 0.9, 0.999, 1e-8);
        let d = adam.step(&[0.0; 3], &[0.1; 3]).unwrap();
        assert_eq!(d, vec![0.0; 3]);
    }

    #[test]
    fn first_step_has_magnitude_lr() {
        let mut adam = Adam::new(4, 0.9, 0.999, 1e-8);
        let d = adam
            .step(&[3.0, -0.5, 0.0, 1e3], &[0.01, 0.02, 0.03, 0.04])
            .unwrap();
        assert!((d[0] + 0.01).abs() < 1e-9);
        assert!((d[1] - 0.02).abs() < 1e-9);
        assert_eq!(d[2], 0.0);
        assert!((d[3] + 0.04).abs() < 1e-9);
    }

    /// Scalar Adam written out longhand.
    fn reference_run(x0: f64, target: f64, lr: f64, steps: usize) -> Vec<f64> {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let (mut x, mut m, mut v) = (x0, 0.0, 0.0);
        let mut xs = vec![];
        for t in 1..=steps {
            let g = 2.0 * (x - target);
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t as i32));
            let vh = v / (1.0 - b2.powi(t as i32));
            x -= lr * mh / (vh.sqrt() + eps);
            xs.push(x);
        }
        xs
    }

    #[test]
    fn quadratic_converges_like_reference() {
        let (x0, target, lr) = (0.5, 0.0, 0.02);
        let reference = reference_run(x0, target, lr, 100);
        let mut adam = Adam::new(1, 0.9, 0.999, 1e-8);
        let mut x = x0;
        for r in &reference {
            x += adam.step(&[2.0 * (x - target)], &[lr]).unwrap()[0];
            assert!((x - r).abs() < 1e-12);
        }
        assert!((x - target).abs() < 1e-3, "x = {x}");
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut adam = Adam::new(2, 0.9, 0.999, 1e-8);
        assert!(adam.step(&[f64::NAN, 0.0], &[0.1, 0.1]).is_err());
    }

    #[test]
    fn update_clamps_and_keeps_rotation_proper() {
        let q = SuperQuadricState::new(
            RigidPose::identity(),
            Vector3::new(0.02, 1.0, 1.0),
            0.15,
            1.85,
        )
        .unwrap();
        let mut delta = [0.0; 11];
        delta[3] = 0.3;
        delta[5] = -0.2;
        delta[6] = -1.0;
        delta[9] = -1.0;
        delta[10] = 1.0;
        let out = apply_update(&q, &delta, ShapeMode::Superquadric);
        assert_eq!(out.shape.alpha.x, crate::geometry::ALPHA_MIN);
        assert_eq!(out.eps(), [0.1, 1.9]);
        assert!(orthonormality_deviation(out.pose.rotation()) < 1e-12);
        let ell = apply_update(&q, &delta, ShapeMode::Ellipsoid);
        assert_eq!(ell.eps(), [1.0, 1.0]);
    }
}
