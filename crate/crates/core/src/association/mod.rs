//! Frame-to-model data association: cost matrices, optimal assignment with
//! gating, track lifecycle and the matching-accuracy metric.

mod accuracy;
mod cost;
mod hungarian;
mod track;

use serde::{Deserialize, Serialize};

pub use accuracy::{matching_accuracy, Decision, DetectionKey, Outcome};
pub use cost::{associate_frame, cost_matrix_2d, cost_matrix_3d, AssignmentResult};
pub use hungarian::{hungarian, Assignment};
pub use track::{confirm_tracks, lift_box, ObjectTrack, TrackStatus, TrackStore};

use crate::error::{Error, Result};
use crate::geometry::{Box2D, CameraIntrinsics, OrientedBox3D, RigidPose};

/// One detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_id: u64,
    pub box2d: Box2D,
    pub class_id: u32,
    pub score: f64,
    /// Single-view 3D box in the camera frame.
    pub sv3d: Option<OrientedBox3D>,
}

impl Detection {
    pub fn validate(&self) -> Result<()> {
        self.box2d.validate()?;
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidParameter(format!(
                "score {} outside [0, 1]",
                self.score
            )));
        }
        if let Some(b) = &self.sv3d {
            b.validate()?;
        }
        Ok(())
    }
}

/// A posed image: `pose` maps world to camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame {
    pub frame_id: u64,
    pub pose: RigidPose,
    pub intrinsics: CameraIntrinsics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AssocMode {
    #[default]
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "2d")]
    TwoD,
}

impl AssocMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AssocMode::ThreeD => "3d",
            AssocMode::TwoD => "2d",
        }
    }
}

impl std::str::FromStr for AssocMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3d" => Ok(AssocMode::ThreeD),
            "2d" => Ok(AssocMode::TwoD),
            other => Err(Error::InvalidParameter(format!(
                "unknown association mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssociationConfig {
    pub mode: AssocMode,
    /// Minimum IoU for a match in 3D mode.
    pub gate_3d: f64,
    /// Minimum IoU for a match in 2D mode.
    pub gate_2d: f64,
    /// Unmatched detections below this score do not start tracks.
    pub spawn_score: f64,
    /// Observations needed before a track is exported.
    pub k_min: usize,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        Self {
            mode: AssocMode::ThreeD,
            gate_3d: 0.2,
            gate_2d: 0.3,
            spawn_score: 0.5,
            k_min: 5,
        }
    }
}

impl AssociationConfig {
    pub fn gate(&self) -> f64 {
        match self.mode {
            AssocMode::ThreeD => self.gate_3d,
            AssocMode::TwoD => self.gate_2d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gate_3d", self.gate_3d),
            ("gate_2d", self.gate_2d),
            ("spawn_score", self.spawn_score),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.k_min == 0 {
            return Err(Error::InvalidParameter("k_min must be positive".into()));
        }
        Ok(())
    }
}
