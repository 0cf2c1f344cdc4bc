use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::association::{AssocMode, AssociationConfig};
use crate::error::{Error, Result};
use crate::evaluation::THRESHOLDS;
use crate::optimizer::{OptimizerConfig, ShapeMode};
use crate::simulator::{CategorySpec, ScenarioSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub thresholds: Vec<f64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            thresholds: THRESHOLDS.to_vec(),
        }
    }
}

/// Every tunable of a run. Missing sections take their defaults; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub optimizer: OptimizerConfig,
    pub association: AssociationConfig,
    pub evaluation: EvaluationConfig,
    /// Shared by the simulator (object draws) and the optimizer (priors).
    pub categories: Vec<CategorySpec>,
    /// Required by `simulate` only.
    pub scenario: Option<ScenarioSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            association: AssociationConfig::default(),
            evaluation: EvaluationConfig::default(),
            categories: CategorySpec::default_table(),
            scenario: None,
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shape_mode: Option<ShapeMode>,
    pub assoc_mode: Option<AssocMode>,
    pub no_prior: bool,
}

impl RunConfig {
    /// Parses JSON text; `context` names the source in error messages.
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::schema(
                format!("{context}:{}:{}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        cfg.validate().map_err(|e| match e {
            Error::Schema { .. } => e,
            other => Error::schema(context, other.to_string()),
        })?;
        Ok(cfg)
    }

    /// Loads a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                Self::from_json(&text, &p.display().to_string())
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let (Some(seed), Some(s)) = (o.seed, self.scenario.as_mut()) {
            s.seed = seed;
        }
        if let Some(m) = o.shape_mode {
            self.optimizer.shape_mode = m;
        }
        if let Some(m) = o.assoc_mode {
            self.association.mode = m;
        }
        if o.no_prior {
            self.optimizer.prior_enabled = false;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        self.association.validate()?;
        for c in &self.categories {
            c.validate()?;
        }
        let mut ids: Vec<u32> = self.categories.iter().map(|c| c.class_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::schema("categories", "duplicate class_id"));
        }
        if self.evaluation.thresholds.is_empty()
            || self
                .evaluation
                .thresholds
                .iter()
                .any(|t| !(0.0..=1.0).contains(t))
        {
            return Err(Error::schema(
                "evaluation.thresholds",
                "need thresholds within [0, 1]",
            ));
        }
        if let Some(s) = &self.scenario {
            s.validate(&self.categories)?;
        }
        Ok(())
    }

    pub fn class_ids(&self) -> Vec<u32> {
        self.categories.iter().map(|c| c.class_id).collect()
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self).map_err(|e| Error::schema("config", e.to_string()))?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}
