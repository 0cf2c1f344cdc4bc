use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::Result;

pub const TOOL_NAME: &str = "quadmap";

/// Provenance attached to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub rng: String,
    pub shape_mode: String,
    pub assoc_mode: String,
    pub prior_enabled: bool,
    pub freeze_roll_pitch: bool,
    /// Boxes are compared unclipped against the image bounds.
    pub box_clipping: String,
    /// Order in which predictions claim ground truth during evaluation.
    pub gt_matching: String,
    pub gate_3d: f64,
    pub gate_2d: f64,
    pub spawn_score: f64,
    pub k_min: usize,
}

impl Manifest {
    pub fn new(cfg: &RunConfig, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: cfg.hash()?,
            seed,
            rng: "ChaCha8Rng".into(),
            shape_mode: cfg.optimizer.shape_mode.as_str().into(),
            assoc_mode: cfg.association.mode.as_str().into(),
            prior_enabled: cfg.optimizer.prior_enabled,
            freeze_roll_pitch: cfg.optimizer.freeze_roll_pitch,
            box_clipping: "none".into(),
            gt_matching: "greedy_descending_iou_then_lower_prediction_id".into(),
            gate_3d: cfg.association.gate_3d,
            gate_2d: cfg.association.gate_2d,
            spawn_score: cfg.association.spawn_score,
            k_min: cfg.association.k_min,
        })
    }
}
