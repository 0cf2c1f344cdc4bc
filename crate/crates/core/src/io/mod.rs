//! File formats, run configuration, manifests, mesh export and the command
//! implementations behind the CLI.

mod commands;
mod config;
mod manifest;
mod mesh;
mod records;

pub use commands::{evaluate, export_mesh, run, simulate, RunOutput, SimulateOutput};
pub use config::{EvaluationConfig, Overrides, RunConfig};
pub use manifest::{Manifest, TOOL_NAME};
pub use mesh::{superquadric_mesh, write_ply, Mesh};
pub use records::{
    read_detection_log, read_json, write_detection_log, write_json, DetectionLogRecord,
    DetectionTruthRecord, FrameRecord, GroundTruthFile, MapFile, MapObjectRecord, SceneFile,
    SceneObjectRecord, StateRecord, Sv3dRecord, TrajectoryRecord,
};
