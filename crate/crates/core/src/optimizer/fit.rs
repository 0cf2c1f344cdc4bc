use super::adam::{adam_step, Adam};
use super::config::{OptimizerConfig, ShapeMode};
use super::objective::{Objective, Observation};
use super::prior::ScalePrior;
use crate::error::{Error, Result};
use crate::geometry::SuperQuadricState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    Incremental,
    Final,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub state: SuperQuadricState,
    /// None in no-optimization mode, where nothing is evaluated.
    pub initial_objective: Option<f64>,
    pub best_objective: Option<f64>,
    /// Adam steps taken.
    pub iterations: usize,
    /// Objective after each step, starting with the initial value.
    pub trace: Vec<f64>,
}

/// Runs one optimization round from `init` and returns the lowest-objective
/// iterate seen (the start included).
pub fn optimize_object(
    init: &SuperQuadricState,
    obs: &[Observation],
    prior: Option<&ScalePrior>,
    cfg: &OptimizerConfig,
    trigger: Trigger,
) -> Result<FitOutcome> {
    if cfg.shape_mode == ShapeMode::NoOptimization {
        return Ok(FitOutcome {
            state: *init,
            initial_objective: None,
            best_objective: None,
            iterations: 0,
            trace: vec![],
        });
    }
    let iters = match trigger {
        Trigger::Incremental => cfg.iters_per_round,
        Trigger::Final => cfg.final_iters,
    };
    let mut state = *init;
    if cfg.shape_mode == ShapeMode::Ellipsoid {
        state.shape.eps1 = 1.0;
        state.shape.eps2 = 1.0;
    }
    let objective = Objective::new(obs, prior, cfg);
    let lr = cfg.learning_rates.per_parameter();
    let mut adam = Adam::from_config(cfg);

    let (v0, mut grad) = objective.gradient(&state)?;
    let mut best = (state, v0.value);
    let mut trace = vec![v0.value];
    let mut steps = 0;
    for _ in 0..iters {
        state = adam_step(&state, &mut adam, &grad, &lr, cfg.shape_mode)?;
        steps += 1;
        match objective.gradient(&state) {
            Ok((v, g)) => {
                trace.push(v.value);
                if v.value < best.1 {
                    best = (state, v.value);
                }
                grad = g;
            }
            Err(Error::NoUsableObservations) => {
                log::debug!("optimization stopped: volume left every view");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(FitOutcome {
        state: best.0,
        initial_objective: Some(v0.value),
        best_objective: Some(best.1),
        iterations: steps,
        trace,
    })
}
