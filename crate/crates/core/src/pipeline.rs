//! Sequential frame loop: associate, accumulate, optimize on schedule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::association::{
    associate_frame, confirm_tracks, AssociationConfig, CameraFrame, Decision, Detection,
    ObjectTrack, Outcome, TrackStore,
};
use crate::error::{Error, Result};
use crate::geometry::SuperQuadricState;
use crate::optimizer::{
    optimize_object, schedule_tick, OptimizerConfig, ScalePrior, Tick, Trigger,
};
use crate::par::Exec;
use crate::simulator::CategorySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundKind {
    Incremental,
    Final,
}

/// One optimization round as it was executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub track_id: u64,
    pub kind: RoundKind,
    /// Frame after which the round ran; `None` for end-of-sequence rounds.
    pub frame_id: Option<u64>,
    pub observations: usize,
    pub iterations: usize,
    pub initial_objective: Option<f64>,
    pub best_objective: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Confirmed tracks after the final round, by track id.
    pub tracks: Vec<ObjectTrack>,
    /// Number of tracks ever spawned.
    pub spawned: usize,
    pub decisions: Vec<Decision>,
    pub rounds: Vec<RoundLog>,
}

/// Per-class priors from a category table.
pub fn priors_from_categories(categories: &[CategorySpec]) -> Result<HashMap<u32, ScalePrior>> {
    categories
        .iter()
        .map(|c| Ok((c.class_id, c.prior()?)))
        .collect()
}

struct Job {
    index: usize,
    start: SuperQuadricState,
    obs: Vec<crate::optimizer::Observation>,
    class_id: u32,
}

/// Runs association and optimization over frames in order. `frames` pairs
/// each camera with its detections; frame ids must increase.
pub fn run_pipeline(
    frames: &[(CameraFrame, Vec<Detection>)],
    categories: &[CategorySpec],
    opt: &OptimizerConfig,
    assoc: &AssociationConfig,
    exec: Exec,
) -> Result<PipelineOutput> {
    opt.validate()?;
    assoc.validate()?;
    let priors = priors_from_categories(categories)?;
    let mu0 = |class: u32| priors.get(&class).map(|p| &p.mu0);
    let mut store = TrackStore::new();
    let mut decisions = Vec::new();
    let mut rounds = Vec::new();
    let mut last_frame: Option<u64> = None;

    for (frame, dets) in frames {
        if last_frame.is_some_and(|l| frame.frame_id <= l) {
            return Err(Error::InvalidParameter(format!(
                "frame {} out of order",
                frame.frame_id
            )));
        }
        last_frame = Some(frame.frame_id);
        for d in dets {
            d.validate()?;
            if d.frame_id != frame.frame_id {
                return Err(Error::schema(
                    "detections",
                    format!(
                        "detection tagged frame {} listed under frame {}",
                        d.frame_id, frame.frame_id
                    ),
                ));
            }
        }
        let result = associate_frame(
            dets,
            frame,
            store.tracks(),
            assoc,
            opt.shape_mode,
            opt.sample_count,
        )?;
        let mut outcome = vec![Outcome::Discarded; dets.len()];
        let mut touched: Vec<(u64, usize)> = Vec::new();
        for &(i, track_id) in &result.matches {
            let t = store.get_mut(track_id).expect("matched track exists");
            let before = t.len();
            t.push(dets[i].clone(), *frame, mu0(dets[i].class_id))?;
            outcome[i] = Outcome::Matched(track_id);
            touched.push((track_id, before));
        }
        for &i in &result.new_tracks {
            let id = store.spawn(dets[i].clone(), *frame, mu0(dets[i].class_id))?;
            outcome[i] = Outcome::NewTrack(id);
            touched.push((id, 0));
        }
        decisions.extend(
            outcome
                .into_iter()
                .enumerate()
                .map(|(index, outcome)| Decision {
                    frame_id: frame.frame_id,
                    index,
                    outcome,
                }),
        );

        touched.sort_unstable();
        let jobs: Vec<Job> = touched
            .iter()
            .filter_map(|&(id, before)| {
                let index = store.tracks().iter().position(|t| t.track_id == id)?;
                let t = &store.tracks()[index];
                (schedule_tick(before, t.len(), false, opt) == Tick::Incremental).then(|| Job {
                    index,
                    start: t.estimate,
                    obs: t.optimizer_observations(),
                    class_id: t.class_id,
                })
            })
            .collect();
        run_jobs(
            &jobs,
            store.tracks_mut(),
            &priors,
            opt,
            Trigger::Incremental,
            Some(frame.frame_id),
            exec,
            &mut rounds,
        )?;
    }

    let spawned = store.tracks().len();
    let mut confirmed = confirm_tracks(store.tracks(), assoc.k_min);
    let jobs: Vec<Job> = confirmed
        .iter()
        .enumerate()
        .filter(|(_, t)| schedule_tick(t.len(), t.len(), true, opt) == Tick::Final)
        .map(|(index, t)| Job {
            index,
            start: t.estimate,
            obs: t.optimizer_observations(),
            class_id: t.class_id,
        })
        .collect();
    run_jobs(
        &jobs,
        &mut confirmed,
        &priors,
        opt,
        Trigger::Final,
        None,
        exec,
        &mut rounds,
    )?;
    Ok(PipelineOutput {
        tracks: confirmed,
        spawned,
        decisions,
        rounds,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_jobs(
    jobs: &[Job],
    tracks: &mut [ObjectTrack],
    priors: &HashMap<u32, ScalePrior>,
    opt: &OptimizerConfig,
    trigger: Trigger,
    frame_id: Option<u64>,
    exec: Exec,
    rounds: &mut Vec<RoundLog>,
) -> Result<()> {
    let results = exec.map(jobs, |j| {
        optimize_object(&j.start, &j.obs, priors.get(&j.class_id), opt, trigger)
    });
    for (job, res) in jobs.iter().zip(results) {
        let track = &mut tracks[job.index];
        let (iterations, initial, best) = match res {
            Ok(out) => {
                if out.iterations > 0 {
                    track.estimate = out.state;
                    track.optimized = true;
                }
                (out.iterations, out.initial_objective, out.best_objective)
            }
            // every view of this track is unusable right now; keep the estimate
            Err(Error::NoUsableObservations) => (0, None, None),
            Err(e) => return Err(e),
        };
        rounds.push(RoundLog {
            track_id: track.track_id,
            kind: match trigger {
                Trigger::Incremental => RoundKind::Incremental,
                Trigger::Final => RoundKind::Final,
            },
            frame_id,
            observations: job.obs.len(),
            iterations,
            initial_objective: initial,
            best_objective: best,
        });
    }
    Ok(())
}
