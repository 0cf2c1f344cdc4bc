//! MAP fitting of one object's super-quadric from its associated boxes.

mod adam;
mod config;
mod fit;
mod init;
mod objective;
mod prior;
mod schedule;

pub use adam::{adam_step, apply_update, Adam};
pub use config::{LearningRates, OptimizerConfig, ShapeMode};
pub use fit::{optimize_object, FitOutcome, Trigger};
pub use init::initialize;
pub use objective::{
    gradient, neg_log_posterior, Extremes, Objective, ObjectiveValue, Observation, ParamVector,
    Surface, MAX_BOX_COORD, PARAM_DIM,
};
pub use prior::ScalePrior;
pub use schedule::{schedule_tick, Tick};
