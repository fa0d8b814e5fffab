use super::{require_history, tail, BlockRecord, DaaAlgorithm, DaaConfig, NextWork};
use crate::target::Difficulty;
use crate::Result;

/// Bitcoin's epoch retarget.
///
/// Off-boundary heights keep the previous difficulty. At heights divisible by
/// `cfg.window` the difficulty is scaled by `expected / actual` timespan over
/// the last `cfg.window` blocks (or all blocks, before a full epoch exists),
/// clamped to `[cfg.min_ratio, cfg.max_ratio]`.
pub fn next_difficulty_bitcoin(history: &[BlockRecord], next_height: u64, cfg: &DaaConfig) -> Result<Difficulty> {
    retarget(history, next_height, cfg).map(|w| w.difficulty)
}

pub(super) fn retarget(history: &[BlockRecord], next_height: u64, cfg: &DaaConfig) -> Result<NextWork> {
    require_history(history, DaaAlgorithm::BitcoinEpoch)?;
    let prev = &history[history.len() - 1];
    if !next_height.is_multiple_of(cfg.window as u64) {
        return Ok(NextWork {
            difficulty: prev.difficulty,
            target: prev.target.clone(),
        });
    }
    let epoch = tail(history, cfg.window);
    let actual: f64 = epoch.iter().map(|b| b.solve_time.seconds()).sum();
    let expected = epoch.len() as f64 * cfg.target_block_time;
    let ratio = (expected / actual).clamp(cfg.min_ratio, cfg.max_ratio);
    NextWork::from_difficulty(prev.difficulty.get() * ratio, cfg)
}
