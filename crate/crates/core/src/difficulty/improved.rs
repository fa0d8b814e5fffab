//! Weighted retarget with surge and fall guards against hashrate jumping.
//!
//! Over a window of `N` blocks (oldest `i = 1`, newest `i = N`):
//!
//! 1. `sum_time = sum(st_i * i)`, `sum_target = sum(target_i)`; the last 10
//!    and last 5 blocks are also summed separately (the last 5 count in both).
//! 2. `sum_time` is raised to at least `N * N * T / 6`.
//! 3. `next = (2 * sum_time / (N * (N + 1))) * (sum_target / N) * (adjust / T)`.
//! 4. Surge guards, first match wins:
//!    last-5 time `<= 1.5 T` caps `next` at `avg_last5_target / 4`;
//!    last-10 time `<= 5 T` caps it at `avg_last10_target / 2`;
//!    last-10 time `<= 10 T` caps it at `avg_last10_target * 2 / 3`.
//! 5. Fall guard: `next <= last_target * 13 / 10`.
//! 6. `next <= pow_limit`.
//!
//! Before `N` blocks exist the window is padded at the front with copies of
//! the earliest block.

use num_bigint::BigUint;

use super::{micros, require_history, tail, BlockRecord, DaaAlgorithm, DaaConfig, ADJUST_SCALE};
use crate::target::{Difficulty, Target};
use crate::Result;

/// Which surge guard capped the target, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurgeGuard {
    /// Last 5 blocks within 1.5 T: cap at a quarter of their mean target.
    Last5Quarter,
    /// Last 10 blocks within 5 T: cap at half their mean target.
    Last10Half,
    /// Last 10 blocks within 10 T: cap at two thirds of their mean target.
    Last10TwoThirds,
}

/// Intermediate values of one retarget, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovedStep {
    pub sum_time_floored: bool,
    /// Target from the weighted average alone.
    pub base_target: BigUint,
    /// The surge guard whose condition held; `None` if none did.
    pub surge_guard: Option<SurgeGuard>,
    /// The surge guard's cap was below the base target.
    pub surge_guard_bound: bool,
    pub fall_guard_bound: bool,
    pub pow_limit_bound: bool,
    pub target: Target,
}

pub fn next_target_improved(history: &[BlockRecord], cfg: &DaaConfig) -> Result<Target> {
    evaluate(history, cfg).map(|s| s.target)
}

pub fn next_difficulty_improved(history: &[BlockRecord], cfg: &DaaConfig) -> Result<Difficulty> {
    next_target_improved(history, cfg).map(|t| Difficulty::from_target(&t))
}

/// Runs one retarget and reports which guards were active.
pub fn evaluate(history: &[BlockRecord], cfg: &DaaConfig) -> Result<ImprovedStep> {
    require_history(history, DaaAlgorithm::ImprovedAntiAttack)?;
    let n = cfg.window;
    let recent = tail(history, n);
    let padding = n - recent.len();
    let window = std::iter::repeat_n(&recent[0], padding).chain(recent.iter());

    let t = cfg.target_micros();
    let mut sum_time: u128 = 0;
    let mut sum_target = BigUint::default();
    let mut last10_time: u128 = 0;
    let mut last10_target = BigUint::default();
    let mut last5_time: u128 = 0;
    let mut last5_target = BigUint::default();

    for (idx, block) in window.enumerate() {
        let i = idx + 1;
        let solve_time = micros(block.solve_time.seconds());
        let target = block.target.value();
        sum_time += solve_time * i as u128;
        sum_target += target;
        if i + 10 > n {
            last10_time += solve_time;
            last10_target += target;
        }
        if i + 5 > n {
            last5_time += solve_time;
            last5_target += target;
        }
    }

    let n = n as u128;
    let min_sum_time = n * n * t / 6;
    let sum_time_floored = sum_time < min_sum_time;
    if sum_time_floored {
        sum_time = min_sum_time;
    }

    // Multiply the time terms, then the targets, then divide once.
    let base_target = sum_target * (2 * sum_time * cfg.adjust_ppm()) / (n * (n + 1) * n * t * ADJUST_SCALE);
    let mut next = base_target.clone();

    let avg_last5 = last5_target / 5u32;
    let avg_last10 = last10_target / 10u32;
    let surge = if 2 * last5_time <= 3 * t {
        Some((SurgeGuard::Last5Quarter, avg_last5 / 4u32))
    } else if last10_time <= 5 * t {
        Some((SurgeGuard::Last10Half, avg_last10 / 2u32))
    } else if last10_time <= 10 * t {
        Some((SurgeGuard::Last10TwoThirds, avg_last10 * 2u32 / 3u32))
    } else {
        None
    };
    let mut surge_guard_bound = false;
    if let Some((_, cap)) = &surge {
        if next > *cap {
            next = cap.clone();
            surge_guard_bound = true;
        }
    }

    let last_target = recent[recent.len() - 1].target.value();
    let fall_cap = last_target * 13u32 / 10u32;
    let fall_guard_bound = next > fall_cap;
    if fall_guard_bound {
        next = fall_cap;
    }

    let pow_limit_bound = next > *cfg.pow_limit.value();
    Ok(ImprovedStep {
        sum_time_floored,
        base_target,
        surge_guard: surge.map(|(g, _)| g),
        surge_guard_bound,
        fall_guard_bound,
        pow_limit_bound,
        target: Target::clamped(next, &cfg.pow_limit),
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;

    fn cfg() -> DaaConfig {
        DaaConfig::new(DaaAlgorithm::ImprovedAntiAttack, 600.0).with_adjust(1.0)
    }

    #[test]
    fn steady_state_no_guards_fire_beyond_the_two_thirds_band() {
        // Slightly slow blocks keep every surge condition false.
        let h = uniform(45, 4.0, 610.0);
        let step = evaluate(&h, &cfg()).unwrap();
        assert_eq!(step.surge_guard, None);
        assert!(!step.fall_guard_bound && !step.sum_time_floored && !step.pow_limit_bound);
        let ratio = step.target.to_f64() / h[0].target.to_f64();
        assert!((ratio - 610.0 / 600.0).abs() < 1e-12);
    }

    #[test]
    fn on_schedule_window_trips_two_thirds_guard() {
        // Ten blocks in exactly 10 T satisfy the `<=` of the last band.
        let h = uniform(45, 4.0, 600.0);
        let step = evaluate(&h, &cfg()).unwrap();
        assert_eq!(step.surge_guard, Some(SurgeGuard::Last10TwoThirds));
        assert!(step.surge_guard_bound);
        assert_eq!(
            step.target.value(),
            &(h[0].target.value() * 10u32 * 2u32 / 10u32 / 3u32)
        );
    }

    #[test]
    fn padding_repeats_earliest_block() {
        let short = history(&[4.0, 5.0], &[700.0, 650.0]);
        let mut diffs = vec![4.0; 44];
        diffs.push(5.0);
        let mut times = vec![700.0; 44];
        times.push(650.0);
        let full = history(&diffs, &times);
        assert_eq!(evaluate(&short, &cfg()).unwrap(), evaluate(&full, &cfg()).unwrap());
    }

    #[test]
    fn burst_caps_at_quarter_of_last5_average() {
        let mut times = vec![600.0; 45];
        for t in times.iter_mut().skip(40) {
            *t = 0.2 * 600.0;
        }
        let h = history(&[4.0; 45], &times);
        let step = evaluate(&h, &cfg()).unwrap();
        assert_eq!(step.surge_guard, Some(SurgeGuard::Last5Quarter));
        let g = h[0].target.value();
        assert_eq!(step.target.value(), &(g * 5u32 / 5u32 / 4u32));
        assert!(Difficulty::from_target(&step.target).get() >= 4.0 * 4.0 * (1.0 - 1e-12));
    }

    #[test]
    fn straggler_is_capped_by_fall_guard() {
        let mut times = vec![600.0; 45];
        times[44] = 20.0 * 600.0;
        let h = history(&[4.0; 45], &times);
        let step = evaluate(&h, &cfg()).unwrap();
        assert!(step.base_target > h[0].target.value() * 13u32 / 10u32);
        assert!(step.fall_guard_bound);
        let d = Difficulty::from_target(&step.target).get();
        assert!((d - 4.0 / 1.3).abs() < 1e-9, "{d}");
    }
}
