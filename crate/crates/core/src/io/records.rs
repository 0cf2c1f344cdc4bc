use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::manifest::Manifest;
use crate::association::{CameraFrame, Decision, Detection};
use crate::error::{Error, Result};
use crate::geometry::{
    Box2D, CameraIntrinsics, OrientedBox3D, RigidPose, Shape, SuperQuadricState,
};
use crate::pipeline::RoundLog;
use crate::simulator::GtObject;

/// Single-view box in the camera frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sv3dRecord {
    pub center: [f64; 3],
    /// Box-to-camera rotation as a unit quaternion [w, x, y, z].
    pub rotation: [f64; 4],
    pub half_extents: [f64; 3],
}

impl Sv3dRecord {
    pub fn from_box(b: &OrientedBox3D) -> Self {
        Self {
            center: b.center().into(),
            rotation: b.pose.quaternion(),
            half_extents: b.half_extents.into(),
        }
    }

    pub fn to_box(&self) -> Result<OrientedBox3D> {
        OrientedBox3D::new(
            RigidPose::from_quaternion(self.rotation, Vector3::from(self.center))?,
            Vector3::from(self.half_extents),
        )
    }
}

/// One line of a detection log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionLogRecord {
    pub frame_id: u64,
    pub class_id: u32,
    pub score: f64,
    /// [xmin, xmax, ymin, ymax]
    pub box2d: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sv3d: Option<Sv3dRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_object_id: Option<u64>,
}

impl DetectionLogRecord {
    pub fn from_detection(d: &Detection, gt_object_id: Option<u64>) -> Self {
        Self {
            frame_id: d.frame_id,
            class_id: d.class_id,
            score: d.score,
            box2d: d.box2d.as_array(),
            sv3d: d.sv3d.as_ref().map(Sv3dRecord::from_box),
            gt_object_id,
        }
    }

    pub fn to_detection(&self) -> Result<Detection> {
        let d = Detection {
            frame_id: self.frame_id,
            box2d: Box2D::from_array(self.box2d)?,
            class_id: self.class_id,
            score: self.score,
            sv3d: self.sv3d.as_ref().map(Sv3dRecord::to_box).transpose()?,
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Serialize)]
struct ManifestLine<'a> {
    manifest: &'a Manifest,
}

/// Writes one JSON object per line, preceded by a manifest line if given.
pub fn write_detection_log(
    path: &Path,
    manifest: Option<&Manifest>,
    records: &[DetectionLogRecord],
) -> Result<()> {
    let mut text = String::new();
    if let Some(m) = manifest {
        text.push_str(&to_json_line(&ManifestLine { manifest: m })?);
    }
    for r in records {
        text.push_str(&to_json_line(r)?);
    }
    write_text(path, &text)
}

fn to_json_line<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string(v).map_err(|e| Error::schema("serialize", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses a detection log. A manifest line may only appear first; blank lines
/// are skipped.
pub fn parse_detection_log(
    text: &str,
    context: &str,
) -> Result<(Option<Manifest>, Vec<DetectionLogRecord>)> {
    let mut manifest = None;
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let where_ = |col: usize| format!("{context}:{}:{col}", n + 1);
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::schema(where_(e.column()), e.to_string()))?;
        if let Some(m) = value.get("manifest") {
            if !records.is_empty() || manifest.is_some() {
                return Err(Error::schema(where_(1), "manifest line must come first"));
            }
            manifest = Some(
                serde_json::from_value(m.clone())
                    .map_err(|e| Error::schema(where_(1), e.to_string()))?,
            );
            continue;
        }
        let rec: DetectionLogRecord =
            serde_json::from_value(value).map_err(|e| Error::schema(where_(1), e.to_string()))?;
        rec.to_detection()
            .map_err(|e| Error::schema(where_(1), e.to_string()))?;
        records.push(rec);
    }
    Ok((manifest, records))
}

pub fn read_detection_log(path: &Path) -> Result<(Option<Manifest>, Vec<DetectionLogRecord>)> {
    parse_detection_log(&read_text(path)?, &path.display().to_string())
}

/// One camera of a trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub frame_id: u64,
    /// World-to-camera rotation [w, x, y, z].
    pub rotation: [f64; 4],
    /// World-to-camera translation.
    pub translation: [f64; 3],
    /// Key into the trajectory's intrinsics table.
    pub intrinsics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<Manifest>,
    pub intrinsics: BTreeMap<String, CameraIntrinsics>,
    pub frames: Vec<FrameRecord>,
}

impl TrajectoryRecord {
    pub fn from_frames(frames: &[CameraFrame], manifest: Option<Manifest>) -> Self {
        let mut table: Vec<CameraIntrinsics> = Vec::new();
        let mut records = Vec::new();
        for f in frames {
            let idx = table
                .iter()
                .position(|k| *k == f.intrinsics)
                .unwrap_or_else(|| {
                    table.push(f.intrinsics);
                    table.len() - 1
                });
            records.push(FrameRecord {
                frame_id: f.frame_id,
                rotation: f.pose.quaternion(),
                translation: (*f.pose.translation()).into(),
                intrinsics: format!("cam{idx}"),
            });
        }
        Self {
            manifest,
            intrinsics: table
                .into_iter()
                .enumerate()
                .map(|(i, k)| (format!("cam{i}"), k))
                .collect(),
            frames: records,
        }
    }

    /// Validates and converts to camera frames.
    pub fn to_frames(&self) -> Result<Vec<CameraFrame>> {
        for (name, k) in &self.intrinsics {
            k.validate()
                .map_err(|e| Error::schema(format!("intrinsics {name}"), e.to_string()))?;
        }
        let mut out: Vec<CameraFrame> = Vec::with_capacity(self.frames.len());
        for f in &self.frames {
            let ctx = || format!("trajectory frame {}", f.frame_id);
            if out.last().is_some_and(|p| f.frame_id <= p.frame_id) {
                return Err(Error::schema(
                    ctx(),
                    "frame_ids must be strictly increasing",
                ));
            }
            let k = self.intrinsics.get(&f.intrinsics).ok_or_else(|| {
                Error::schema(ctx(), format!("unknown intrinsics {:?}", f.intrinsics))
            })?;
            let pose = RigidPose::from_quaternion(f.rotation, Vector3::from(f.translation))
                .map_err(|e| Error::schema(ctx(), e.to_string()))?;
            out.push(CameraFrame {
                frame_id: f.frame_id,
                pose,
                intrinsics: *k,
            });
        }
        Ok(out)
    }
}

/// Super-quadric parameters: object-to-world rotation [w, x, y, z] and
/// translation, half extents, exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub rotation: [f64; 4],
    pub translation: [f64; 3],
    pub alpha: [f64; 3],
    pub eps: [f64; 2],
}

impl StateRecord {
    pub fn from_state(q: &SuperQuadricState) -> Self {
        Self {
            rotation: q.pose.quaternion(),
            translation: (*q.pose.translation()).into(),
            alpha: q.shape.alpha.into(),
            eps: q.eps(),
        }
    }

    pub fn to_state(&self) -> Result<SuperQuadricState> {
        Ok(SuperQuadricState {
            pose: RigidPose::from_quaternion(self.rotation, Vector3::from(self.translation))?,
            shape: Shape::new(Vector3::from(self.alpha), self.eps[0], self.eps[1])?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObjectRecord {
    pub object_id: u64,
    pub class_id: u32,
    pub theta: StateRecord,
}

impl SceneObjectRecord {
    pub fn from_object(o: &GtObject) -> Self {
        Self {
            object_id: o.object_id,
            class_id: o.class_id,
            theta: StateRecord::from_state(&o.state),
        }
    }

    pub fn to_object(&self) -> Result<GtObject> {
        Ok(GtObject {
            object_id: self.object_id,
            class_id: self.class_id,
            state: self.theta.to_state()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub manifest: Manifest,
    pub objects: Vec<SceneObjectRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionTruthRecord {
    pub frame_id: u64,
    /// Position of the detection among its frame's detections.
    pub index: usize,
    pub object_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthFile {
    pub manifest: Manifest,
    pub objects: Vec<SceneObjectRecord>,
    pub detections: Vec<DetectionTruthRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapObjectRecord {
    pub track_id: u64,
    pub class_id: u32,
    pub theta: StateRecord,
    pub observation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub manifest: Manifest,
    pub objects: Vec<MapObjectRecord>,
    pub decisions: Vec<Decision>,
    pub rounds: Vec<RoundLog>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::schema("serialize", e.to_string()))?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Error::schema(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
