use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::manifest::Manifest;
use super::mesh::{superquadric_mesh, write_ply};
use super::records::{
    read_detection_log, read_json, write_detection_log, write_json, DetectionLogRecord,
    DetectionTruthRecord, GroundTruthFile, MapFile, MapObjectRecord, SceneFile, SceneObjectRecord,
    StateRecord, TrajectoryRecord,
};
use crate::association::{matching_accuracy, AssocMode, CameraFrame, Detection, DetectionKey};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_run, EvalReport, Labeled};
use crate::par::Exec;
use crate::pipeline::{run_pipeline, PipelineOutput};
use crate::simulator::{generate_scene, render_detections, GroundTruth, RenderedFrame, Scene};

pub const SCENE_FILE: &str = "scene.json";
pub const TRAJECTORY_FILE: &str = "trajectory.json";
pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const MAP_FILE: &str = "map.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub scene: Scene,
    pub frames: Vec<RenderedFrame>,
    pub manifest: Manifest,
}

/// Generates a scene from `cfg.scenario` and writes scene, trajectory,
/// detection log and ground truth into `out`.
pub fn simulate(cfg: &RunConfig, out: &Path, exec: Exec) -> Result<SimulateOutput> {
    let spec = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| Error::schema("config", "missing field `scenario` (with its `seed`)"))?;
    let manifest = Manifest::new(cfg, Some(spec.seed))?;
    let scene = generate_scene(spec, &cfg.categories)?;
    let frames = render_detections(&scene, spec, exec)?;
    let truth = GroundTruth::new(&scene, &frames);

    create_dir(out)?;
    let objects: Vec<SceneObjectRecord> = scene
        .objects
        .iter()
        .map(SceneObjectRecord::from_object)
        .collect();
    write_json(
        &out.join(SCENE_FILE),
        &SceneFile {
            manifest: manifest.clone(),
            objects: objects.clone(),
        },
    )?;
    let cams: Vec<CameraFrame> = frames.iter().map(|f| f.frame).collect();
    write_json(
        &out.join(TRAJECTORY_FILE),
        &TrajectoryRecord::from_frames(&cams, Some(manifest.clone())),
    )?;
    let records: Vec<DetectionLogRecord> = frames
        .iter()
        .flat_map(|f| {
            f.detections
                .iter()
                .zip(&f.object_ids)
                .map(|(d, &o)| DetectionLogRecord::from_detection(d, Some(o)))
        })
        .collect();
    write_detection_log(&out.join(DETECTIONS_FILE), Some(&manifest), &records)?;
    write_json(
        &out.join(GROUND_TRUTH_FILE),
        &GroundTruthFile {
            manifest: manifest.clone(),
            objects,
            detections: truth
                .detection_objects
                .iter()
                .map(|(&(frame_id, index), &object_id)| DetectionTruthRecord {
                    frame_id,
                    index,
                    object_id,
                })
                .collect(),
        },
    )?;
    Ok(SimulateOutput {
        scene,
        frames,
        manifest,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub map: MapFile,
    pub report: Option<EvalReport>,
    pub pipeline: PipelineOutput,
}

/// Maps a detection log against a trajectory and writes `map.json`; with
/// ground truth also writes the evaluation report.
pub fn run(
    detections: &Path,
    trajectory: &Path,
    ground_truth: Option<&Path>,
    cfg: &RunConfig,
    seed: Option<u64>,
    out: &Path,
    exec: Exec,
) -> Result<RunOutput> {
    let traj: TrajectoryRecord = read_json(trajectory)?;
    let cams = traj.to_frames()?;
    let (log_manifest, records) = read_detection_log(detections)?;
    let frames = group_by_frame(&cams, &records, cfg.association.mode)?;
    let seed = seed
        .or(cfg.scenario.as_ref().map(|s| s.seed))
        .or(log_manifest.and_then(|m| m.seed));
    let manifest = Manifest::new(cfg, seed)?;

    let pipeline = run_pipeline(
        &frames,
        &cfg.categories,
        &cfg.optimizer,
        &cfg.association,
        exec,
    )?;
    let map = MapFile {
        manifest: manifest.clone(),
        objects: pipeline
            .tracks
            .iter()
            .map(|t| MapObjectRecord {
                track_id: t.track_id,
                class_id: t.class_id,
                theta: StateRecord::from_state(&t.estimate),
                observation_count: t.len(),
            })
            .collect(),
        decisions: pipeline.decisions.clone(),
        rounds: pipeline.rounds.clone(),
    };
    create_dir(out)?;
    write_json(&out.join(MAP_FILE), &map)?;
    let report = match ground_truth {
        Some(p) => {
            let gt: GroundTruthFile = read_json(p)?;
            let report = report_for(&map, &gt, cfg)?;
            write_report(out, &report)?;
            Some(report)
        }
        None => None,
    };
    Ok(RunOutput {
        map,
        report,
        pipeline,
    })
}

/// Scores an existing map file against ground truth.
pub fn evaluate(
    map_path: &Path,
    gt_path: &Path,
    cfg: &RunConfig,
    out: &Path,
) -> Result<EvalReport> {
    let map: MapFile = read_json(map_path)?;
    let gt: GroundTruthFile = read_json(gt_path)?;
    let report = report_for(&map, &gt, cfg)?;
    create_dir(out)?;
    write_report(out, &report)?;
    Ok(report)
}

/// Writes one PLY mesh per map object and returns the paths.
pub fn export_mesh(
    map_path: &Path,
    out: &Path,
    grid_u: usize,
    grid_v: usize,
) -> Result<Vec<PathBuf>> {
    let map: MapFile = read_json(map_path)?;
    create_dir(out)?;
    let mut paths = Vec::new();
    for o in &map.objects {
        let q = o
            .theta
            .to_state()
            .map_err(|e| Error::schema(format!("map object {}", o.track_id), e.to_string()))?;
        let path = out.join(format!("object_{:04}.ply", o.track_id));
        write_ply(&path, &superquadric_mesh(&q, grid_u, grid_v)?)?;
        paths.push(path);
    }
    Ok(paths)
}

fn report_for(map: &MapFile, gt: &GroundTruthFile, cfg: &RunConfig) -> Result<EvalReport> {
    let preds = map
        .objects
        .iter()
        .map(|o| {
            Ok(Labeled {
                id: o.track_id,
                class_id: o.class_id,
                obb: o.theta.to_state()?.enclosing_obb(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gts = gt
        .objects
        .iter()
        .map(|o| {
            Ok(Labeled {
                id: o.object_id,
                class_id: o.class_id,
                obb: o.theta.to_state()?.enclosing_obb(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let truth: HashMap<DetectionKey, u64> = gt
        .detections
        .iter()
        .map(|d| ((d.frame_id, d.index), d.object_id))
        .collect();
    let accuracy = if map.decisions.is_empty() {
        None
    } else {
        Some(
            matching_accuracy(&map.decisions, &truth)
                .map_err(|e| Error::schema("ground truth", e.to_string()))?,
        )
    };
    evaluate_run(
        &preds,
        &gts,
        &cfg.class_ids(),
        &cfg.evaluation.thresholds,
        accuracy,
        map.manifest.clone(),
    )
}

fn write_report(out: &Path, report: &EvalReport) -> Result<()> {
    write_json(&out.join(REPORT_JSON), report)?;
    super::records::write_text(&out.join(REPORT_CSV), &report.to_csv())
}

fn group_by_frame(
    cams: &[CameraFrame],
    records: &[DetectionLogRecord],
    mode: AssocMode,
) -> Result<Vec<(CameraFrame, Vec<Detection>)>> {
    let mut by_frame: BTreeMap<u64, Vec<Detection>> =
        cams.iter().map(|c| (c.frame_id, vec![])).collect();
    for (n, r) in records.iter().enumerate() {
        if mode == AssocMode::ThreeD && r.sv3d.is_none() {
            return Err(Error::schema(
                format!("detection {n}"),
                "association mode 3d needs an sv3d box on every detection; use --assoc 2d",
            ));
        }
        let slot = by_frame.get_mut(&r.frame_id).ok_or_else(|| {
            Error::schema(
                format!("detection {n}"),
                format!(
                    "frame_id mismatch: frame {} is not in the trajectory",
                    r.frame_id
                ),
            )
        })?;
        slot.push(r.to_detection()?);
    }
    Ok(cams
        .iter()
        .map(|c| (*c, by_frame.remove(&c.frame_id).unwrap_or_default()))
        .collect())
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{NoiseSpec, ObjectCount, OrbitSpec, ScenarioSpec, TrajectorySpec};

    fn tiny_config(seed: u64) -> RunConfig {
        let mut s = ScenarioSpec::with_seed(seed);
        s.objects = vec![ObjectCount {
            class_id: 3,
            count: 1,
        }];
        s.noise = NoiseSpec::noiseless();
        s.trajectory = TrajectorySpec::Orbit(OrbitSpec {
            center: [0.0, 0.0, 0.4],
            radius: 5.0,
            height: 1.5,
            height_amplitude: 0.5,
            height_cycles: 3,
            frames: 6,
        });
        let mut cfg = RunConfig {
            scenario: Some(s),
            ..Default::default()
        };
        cfg.optimizer.final_iters = 10;
        cfg
    }

    #[test]
    fn simulate_writes_four_files_and_trajectory_count() {
        let dir = tempfile::tempdir().unwrap();
        simulate(&tiny_config(1), dir.path(), Exec::Sequential).unwrap();
        for f in [
            SCENE_FILE,
            TRAJECTORY_FILE,
            DETECTIONS_FILE,
            GROUND_TRUTH_FILE,
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let t: TrajectoryRecord = read_json(&dir.path().join(TRAJECTORY_FILE)).unwrap();
        assert_eq!(t.frames.len(), 6);
    }

    #[test]
    fn missing_scenario_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = simulate(&RunConfig::default(), dir.path(), Exec::Sequential).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn run_and_evaluate_agree() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(2);
        simulate(&cfg, dir.path(), Exec::Sequential).unwrap();
        let p = |f: &str| dir.path().join(f);
        let out = run(
            &p(DETECTIONS_FILE),
            &p(TRAJECTORY_FILE),
            Some(&p(GROUND_TRUTH_FILE)),
            &cfg,
            None,
            &dir.path().join("run"),
            Exec::Sequential,
        )
        .unwrap();
        let report = out.report.unwrap();
        assert_eq!(report.manifest.config_hash, cfg.hash().unwrap());
        assert_eq!(report.matching_accuracy, Some(1.0));
        let again = evaluate(
            &dir.path().join("run").join(MAP_FILE),
            &p(GROUND_TRUTH_FILE),
            &cfg,
            &dir.path().join("ev"),
        )
        .unwrap();
        assert_eq!(again, report);
        let meshes = export_mesh(
            &dir.path().join("run").join(MAP_FILE),
            &dir.path().join("mesh"),
            8,
            12,
        )
        .unwrap();
        assert_eq!(meshes.len(), out.map.objects.len());
    }
}
