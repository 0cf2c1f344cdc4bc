//! Synthetic scenes, camera trajectories and noisy detection logs.

mod render;
mod scene;
mod trajectory;

pub use render::{render_detections, GroundTruth, RenderedFrame};
pub use scene::{
    find_category, generate_scene, CategorySpec, GtObject, NoiseSpec, ObjectCount, PoseSpec,
    RoomSpec, ScenarioSpec, Scene, TrajectorySpec, MAX_ATTEMPTS,
};
pub use trajectory::{camera_center, look_at, orbit_trajectory, OrbitSpec};
