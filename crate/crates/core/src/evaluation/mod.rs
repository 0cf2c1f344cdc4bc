//! Detection metrics: oriented-box IoU, once-matched precision/recall/F1.

mod iou;
mod metrics;

pub use iou::{intersection_volume, iou3d, iou3d_montecarlo};
pub use metrics::{
    evaluate_run, match_predictions, ClassMetrics, Counts, EvalReport, Labeled, MatchResult,
    Metrics, ThresholdReport, THRESHOLDS,
};
