use num_bigint::BigUint;

use super::{micros, require_history, tail, BlockRecord, DaaAlgorithm, DaaConfig, ADJUST_SCALE};
use crate::target::{Difficulty, Target};
use crate::Result;

/// Linearly weighted retarget over the last `cfg.window` blocks.
///
/// With `n` blocks in the window, the newest solve time has weight `n` and
/// the oldest weight 1:
///
/// ```text
/// avg_time    = 2 * sum(w_i * st_i) / (n * (n + 1))
/// avg_target  = sum(target_i) / n
/// next_target = avg_target * avg_time / (T * adjust)
/// ```
///
/// evaluated as one floor division after all multiplications.
pub fn next_target_btg_weighted(history: &[BlockRecord], cfg: &DaaConfig) -> Result<Target> {
    require_history(history, DaaAlgorithm::BtgWeighted)?;
    let window = tail(history, cfg.window);
    let n = window.len() as u128;

    let weighted_time: u128 = window
        .iter()
        .enumerate()
        .map(|(i, b)| (i as u128 + 1) * micros(b.solve_time.seconds()))
        .sum();
    let sum_target: BigUint = window.iter().map(|b| b.target.value()).sum();

    let numerator = sum_target * (2 * weighted_time * ADJUST_SCALE);
    let denominator = n * n * (n + 1) * cfg.target_micros() * cfg.adjust_ppm();
    Ok(Target::clamped(numerator / denominator, &cfg.pow_limit))
}

pub fn next_difficulty_btg_weighted(history: &[BlockRecord], cfg: &DaaConfig) -> Result<Difficulty> {
    next_target_btg_weighted(history, cfg).map(|t| Difficulty::from_target(&t))
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;
    use num_traits::One;

    fn cfg(window: usize, adjust: f64) -> DaaConfig {
        DaaConfig::new(DaaAlgorithm::BtgWeighted, 600.0)
            .with_window(window)
            .with_adjust(adjust)
    }

    #[test]
    fn fixed_point_without_damping() {
        let h = uniform(45, 4.0, 600.0);
        assert_eq!(next_target_btg_weighted(&h, &cfg(45, 1.0)).unwrap(), h[0].target);
    }

    #[test]
    fn double_times_double_target() {
        let h = uniform(45, 4.0, 1200.0);
        let next = next_target_btg_weighted(&h, &cfg(45, 1.0)).unwrap();
        assert_eq!(next.value(), &(h[0].target.value() * 2u32));
    }

    #[test]
    fn two_block_hand_evaluation() {
        // avg_time = (1 * 10 + 2 * 590) / 3 = 396.67 s
        let h = history(&[4.0, 4.0], &[10.0, 590.0]);
        let next = next_target_btg_weighted(&h, &cfg(2, 1.0)).unwrap();
        let g = h[0].target.value();
        // sum_target = 2g; 2g * 2 * (10 + 1180) s / (2 * 2 * 3 * 600 s), floored.
        let expected = g * 2u32 * (2u32 * 1190) / (2u32 * 2 * 3 * 600);
        assert_eq!(next.value(), &expected);
        let ratio = next.to_f64() / h[0].target.to_f64();
        assert!((ratio - 396.666_666_666_666_7 / 600.0).abs() < 1e-12);
    }

    #[test]
    fn newest_block_weighs_most() {
        let fast_last = history(&[4.0, 4.0], &[600.0, 60.0]);
        let fast_first = history(&[4.0, 4.0], &[60.0, 600.0]);
        let a = next_target_btg_weighted(&fast_last, &cfg(2, 1.0)).unwrap();
        let b = next_target_btg_weighted(&fast_first, &cfg(2, 1.0)).unwrap();
        assert!(a < b);
    }

    #[test]
    fn adjust_below_one_eases_target() {
        let h = uniform(45, 4.0, 600.0);
        let next = next_target_btg_weighted(&h, &cfg(45, 0.998)).unwrap();
        assert!(next > h[0].target);
    }

    #[test]
    fn zero_weighted_time_floors_to_one() {
        let h = uniform(3, 4.0, 1e-9);
        let next = next_target_btg_weighted(&h, &cfg(3, 1.0)).unwrap();
        assert_eq!(next.value(), &BigUint::one());
    }
}
