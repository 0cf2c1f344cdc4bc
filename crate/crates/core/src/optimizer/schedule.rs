use super::config::OptimizerConfig;

/// What the optimizer should do for a track after an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tick {
    None,
    Incremental,
    Final,
}

/// Incremental round when the observation count crosses a multiple of
/// `obs_per_round`; final round at the end of the sequence.
pub fn schedule_tick(
    prev_count: usize,
    new_count: usize,
    sequence_end: bool,
    cfg: &OptimizerConfig,
) -> Tick {
    if sequence_end {
        return if new_count >= 1 {
            Tick::Final
        } else {
            Tick::None
        };
    }
    let k = cfg.obs_per_round;
    if new_count / k > prev_count / k {
        Tick::Incremental
    } else {
        Tick::None
    }
}
