use num_bigint::BigUint;

use super::{micros, require_history, tail, BlockRecord, DaaAlgorithm, DaaConfig};
use crate::target::{Difficulty, Target};
use crate::Result;

/// DigiShield v3 over the last `cfg.window` blocks.
///
/// `new_target = mean_target * span / expected`, where `span` is the
/// window's total solve time moved toward `expected` by `1/damping` and then
/// clamped to `expected * [1 - up%, 1 + down%]`.
pub fn next_target_digishield(history: &[BlockRecord], cfg: &DaaConfig) -> Result<Target> {
    require_history(history, DaaAlgorithm::DigiShield17)?;
    let window = tail(history, cfg.window);
    let n = window.len() as u32;
    let params = &cfg.digishield;

    let sum_target: BigUint = window.iter().map(|b| b.target.value()).sum();
    let mean_target = sum_target / n;

    let expected = (n as u128 * cfg.target_micros()) as i128;
    let actual = window.iter().map(|b| micros(b.solve_time.seconds())).sum::<u128>() as i128;
    // Truncating division, as in the deployed code.
    let damped = expected + (actual - expected) / params.damping as i128;
    let min_span = expected * (100 - params.max_adjust_up_pct as i128) / 100;
    let max_span = expected * (100 + params.max_adjust_down_pct as i128) / 100;
    let span = damped.clamp(min_span, max_span) as u128;

    let next = mean_target * span / expected as u128;
    Ok(Target::clamped(next, &cfg.pow_limit))
}

pub fn next_difficulty_digishield(history: &[BlockRecord], cfg: &DaaConfig) -> Result<Difficulty> {
    next_target_digishield(history, cfg).map(|t| Difficulty::from_target(&t))
}
