use super::{require_history, tail, BlockRecord, DaaAlgorithm, DaaConfig, NextWork};
use crate::target::Difficulty;
use crate::Result;

/// Block-by-block retarget over the last `cfg.window` blocks.
///
/// The estimate is the window's mean difficulty scaled by
/// `window * T / sum(solve times)`. The change relative to the previous
/// block's difficulty is clamped to `[cfg.min_ratio, cfg.max_ratio]`.
pub fn next_difficulty_bch(history: &[BlockRecord], cfg: &DaaConfig) -> Result<Difficulty> {
    retarget(history, cfg).map(|w| w.difficulty)
}

pub(super) fn retarget(history: &[BlockRecord], cfg: &DaaConfig) -> Result<NextWork> {
    require_history(history, DaaAlgorithm::Bch144)?;
    let prev = history[history.len() - 1].difficulty.get();
    let window = tail(history, cfg.window);
    let n = window.len() as f64;
    let (sum_difficulty, sum_time) = window.iter().fold((0.0, 0.0), |(d, t), b| {
        (d + b.difficulty.get(), t + b.solve_time.seconds())
    });
    let estimate = (sum_difficulty / n) * (n * cfg.target_block_time) / sum_time;
    let ratio = (estimate / prev).clamp(cfg.min_ratio, cfg.max_ratio);
    NextWork::from_difficulty(prev * ratio, cfg)
}
