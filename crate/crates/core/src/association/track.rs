use nalgebra::Vector3;

use super::{CameraFrame, Detection};
use crate::error::{Error, Result};
use crate::geometry::{OrientedBox3D, RigidPose, SuperQuadricState};
use crate::optimizer::{initialize, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
}

/// One mapped object and everything associated with it so far.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectTrack {
    pub track_id: u64,
    pub class_id: u32,
    pub observations: Vec<(Detection, CameraFrame)>,
    pub estimate: SuperQuadricState,
    pub status: TrackStatus,
    /// Set once an optimization round has replaced the averaged start.
    pub optimized: bool,
    single_views: Vec<OrientedBox3D>,
}

impl ObjectTrack {
    /// Starts a track from one detection. `mu0` is the class mean size, used
    /// only when the detection carries no single-view box.
    pub fn spawn(
        track_id: u64,
        det: Detection,
        frame: CameraFrame,
        mu0: Option<&Vector3<f64>>,
    ) -> Result<Self> {
        let sv = world_single_view(&det, &frame, mu0)?;
        Ok(Self {
            track_id,
            class_id: det.class_id,
            estimate: initialize(std::slice::from_ref(&sv))?,
            observations: vec![(det, frame)],
            status: TrackStatus::Tentative,
            optimized: false,
            single_views: vec![sv],
        })
    }

    /// Appends an observation. Until the first optimization the estimate is
    /// the running average of the single-view boxes.
    pub fn push(
        &mut self,
        det: Detection,
        frame: CameraFrame,
        mu0: Option<&Vector3<f64>>,
    ) -> Result<()> {
        if det.class_id != self.class_id {
            return Err(Error::InvalidParameter(format!(
                "class {} detection pushed onto class {} track",
                det.class_id, self.class_id
            )));
        }
        if let Some((_, last)) = self.observations.last() {
            if frame.frame_id <= last.frame_id {
                return Err(Error::InvalidParameter(format!(
                    "track {} already has frame {}, got {}",
                    self.track_id, last.frame_id, frame.frame_id
                )));
            }
        }
        self.single_views
            .push(world_single_view(&det, &frame, mu0)?);
        self.observations.push((det, frame));
        if !self.optimized {
            self.estimate = initialize(&self.single_views)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// World-frame single-view boxes in observation order.
    pub fn single_views(&self) -> &[OrientedBox3D] {
        &self.single_views
    }

    /// The averaged initialization over every single-view box so far.
    pub fn averaged_initialization(&self) -> Result<SuperQuadricState> {
        initialize(&self.single_views)
    }

    /// Snapshot handed to the optimizer.
    pub fn optimizer_observations(&self) -> Vec<Observation> {
        self.observations
            .iter()
            .map(|(d, f)| Observation {
                frame_id: f.frame_id,
                cam_pose: f.pose,
                intrinsics: f.intrinsics,
                bbox: d.box2d,
            })
            .collect()
    }
}

fn world_single_view(
    det: &Detection,
    frame: &CameraFrame,
    mu0: Option<&Vector3<f64>>,
) -> Result<OrientedBox3D> {
    let cam = match (&det.sv3d, mu0) {
        (Some(b), _) => *b,
        (None, Some(m)) => lift_box(det, frame, m)?,
        (None, None) => {
            return Err(Error::InvalidParameter(format!(
                "class {} has neither a single-view box nor a size prior",
                det.class_id
            )))
        }
    };
    Ok(cam.transformed(&frame.pose.inverse()))
}

/// Camera-frame box for a detection without a single-view estimate: the class
/// mean size placed at the depth where it would produce the detected box,
/// axis-aligned with the world.
pub fn lift_box(det: &Detection, frame: &CameraFrame, mu0: &Vector3<f64>) -> Result<OrientedBox3D> {
    let k = &frame.intrinsics;
    let (w, h) = (det.box2d.width(), det.box2d.height());
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::DegenerateBox([w, h, 0.0]));
    }
    let depth = 0.5 * (k.fx * 2.0 * mu0.x.max(mu0.y) / w + k.fy * 2.0 * mu0.z / h);
    let c = det.box2d.center();
    let center = Vector3::new(
        (c.x - k.cx) * depth / k.fx,
        (c.y - k.cy) * depth / k.fy,
        depth,
    );
    let pose = RigidPose::new(*frame.pose.rotation(), center)?;
    OrientedBox3D::new(pose, *mu0)
}

/// Marks tracks with at least `k_min` observations as confirmed and returns
/// only those.
pub fn confirm_tracks(tracks: &[ObjectTrack], k_min: usize) -> Vec<ObjectTrack> {
    tracks
        .iter()
        .filter(|t| t.len() >= k_min)
        .map(|t| ObjectTrack {
            status: TrackStatus::Confirmed,
            ..t.clone()
        })
        .collect()
}

/// Owns the tracks and hands out ids.
#[derive(Debug, Clone, Default)]
pub struct TrackStore {
    tracks: Vec<ObjectTrack>,
    next_id: u64,
}

impl TrackStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tracks(&self) -> &[ObjectTrack] {
        &self.tracks
    }

    pub fn tracks_mut(&mut self) -> &mut [ObjectTrack] {
        &mut self.tracks
    }

    pub fn get_mut(&mut self, track_id: u64) -> Option<&mut ObjectTrack> {
        self.tracks.iter_mut().find(|t| t.track_id == track_id)
    }

    pub fn spawn(
        &mut self,
        det: Detection,
        frame: CameraFrame,
        mu0: Option<&Vector3<f64>>,
    ) -> Result<u64> {
        let id = self.next_id;
        self.tracks.push(ObjectTrack::spawn(id, det, frame, mu0)?);
        self.next_id += 1;
        Ok(id)
    }

    pub fn into_tracks(self) -> Vec<ObjectTrack> {
        self.tracks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box2D, CameraIntrinsics};

    fn frame(id: u64) -> CameraFrame {
        CameraFrame {
            frame_id: id,
            pose: RigidPose::from_translation(Vector3::new(0.0, 0.0, 4.0)),
            intrinsics: CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap(),
        }
    }

    fn det(id: u64, x: f64) -> Detection {
        Detection {
            frame_id: id,
            box2d: Box2D::new(300.0, 340.0, 220.0, 260.0).unwrap(),
            class_id: 1,
            score: 0.9,
            sv3d: Some(
                OrientedBox3D::new(
                    RigidPose::from_translation(Vector3::new(x, 0.0, 0.0)),
                    Vector3::new(0.2, 0.3, 0.4),
                )
                .unwrap(),
            ),
        }
    }

    #[test]
    fn estimate_is_running_average() {
        let mut t = ObjectTrack::spawn(0, det(0, 0.0), frame(0), None).unwrap();
        t.push(det(1, 1.0), frame(1), None).unwrap();
        // camera sits at z = -4 in the world
        assert!((t.estimate.pose.translation() - Vector3::new(0.5, 0.0, -4.0)).norm() < 1e-12);
        t.optimized = true;
        t.push(det(2, 5.0), frame(2), None).unwrap();
        assert!((t.estimate.pose.translation().x - 0.5).abs() < 1e-12);
        assert!((t.averaged_initialization().unwrap().pose.translation().x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frames_must_increase() {
        let mut t = ObjectTrack::spawn(0, det(3, 0.0), frame(3), None).unwrap();
        assert!(t.push(det(3, 0.0), frame(3), None).is_err());
    }

    #[test]
    fn class_must_match() {
        let mut t = ObjectTrack::spawn(0, det(0, 0.0), frame(0), None).unwrap();
        let mut d = det(1, 0.0);
        d.class_id = 2;
        assert!(t.push(d, frame(1), None).is_err());
    }

    #[test]
    fn lift_reproduces_box_center_and_size() {
        let f = frame(0);
        let mut d = det(0, 0.0);
        d.sv3d = None;
        let mu0 = Vector3::new(0.2, 0.2, 0.2);
        let b = lift_box(&d, &f, &mu0).unwrap();
        // 40 px box for a 0.4 m object at f = 500 -> 5 m
        assert!((b.center() - Vector3::new(0.0, 0.0, 5.0)).norm() < 1e-12);
    }

    #[test]
    fn confirmation_threshold() {
        let mut t = ObjectTrack::spawn(0, det(0, 0.0), frame(0), None).unwrap();
        for i in 1..4 {
            t.push(det(i, 0.0), frame(i), None).unwrap();
        }
        assert!(confirm_tracks(std::slice::from_ref(&t), 5).is_empty());
        t.push(det(4, 0.0), frame(4), None).unwrap();
        let c = confirm_tracks(std::slice::from_ref(&t), 5);
        assert_eq!(c[0].status, TrackStatus::Confirmed);
        assert_eq!(confirm_tracks(std::slice::from_ref(&t), 1).len(), 1);
    }
}
