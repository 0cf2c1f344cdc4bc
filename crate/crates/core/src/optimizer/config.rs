use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DEFAULT_SAMPLES;

/// Which volume family is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeMode {
    #[default]
    Superquadric,
    /// Exponents frozen at (1, 1).
    Ellipsoid,
    /// Projected box taken from the 8 corners of `±alpha`; exponents unused.
    Cuboid,
    /// Averaged single-view boxes, no optimization.
    NoOptimization,
}

impl ShapeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShapeMode::Superquadric => "superquadric",
            ShapeMode::Ellipsoid => "ellipsoid",
            ShapeMode::Cuboid => "cuboid",
            ShapeMode::NoOptimization => "no_optimization",
        }
    }
}

impl std::str::FromStr for ShapeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "superquadric" => Ok(ShapeMode::Superquadric),
            "ellipsoid" => Ok(ShapeMode::Ellipsoid),
            "cuboid" => Ok(ShapeMode::Cuboid),
            "no_optimization" => Ok(ShapeMode::NoOptimization),
            other => Err(Error::InvalidParameter(format!(
                "unknown shape mode {other:?}"
            ))),
        }
    }
}

/// Per-group Adam step sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningRates {
    pub translation: f64,
    pub rotation: f64,
    pub alpha: f64,
    pub eps: f64,
}

impl Default for LearningRates {
    fn default() -> Self {
        Self {
            translation: 0.01,
            rotation: 0.005,
            alpha: 0.01,
            eps: 0.02,
        }
    }
}

impl LearningRates {
    /// Expanded to the 11-parameter layout.
    pub fn per_parameter(&self) -> [f64; 11] {
        let mut lr = [0.0; 11];
        lr[0..3].fill(self.translation);
        lr[3..6].fill(self.rotation);
        lr[6..9].fill(self.alpha);
        lr[9..11].fill(self.eps);
        lr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Assumed variance of each detected box corner coordinate, px².
    pub sigma2: f64,
    pub sample_count: usize,
    pub iters_per_round: usize,
    pub obs_per_round: usize,
    pub final_iters: usize,
    pub learning_rates: LearningRates,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub prior_enabled: bool,
    pub shape_mode: ShapeMode,
    /// Restrict rotation updates to yaw about the world z axis.
    pub freeze_roll_pitch: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            sigma2: 20.0,
            sample_count: DEFAULT_SAMPLES,
            iters_per_round: 20,
            obs_per_round: 50,
            final_iters: 200,
            learning_rates: LearningRates::default(),
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            prior_enabled: true,
            shape_mode: ShapeMode::Superquadric,
            freeze_roll_pitch: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return bad("sigma2 must be positive");
        }
        if self.sample_count < crate::geometry::MIN_SAMPLES {
            return bad("sample_count must be at least 26");
        }
        if self.iters_per_round == 0 || self.obs_per_round == 0 || self.final_iters == 0 {
            return bad("iteration and round counts must be positive");
        }
        let lr = &self.learning_rates;
        if [lr.translation, lr.rotation, lr.alpha, lr.eps]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return bad("learning rates must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if !(self.adam_epsilon > 0.0) {
            return bad("adam_epsilon must be positive");
        }
        Ok(())
    }
}
