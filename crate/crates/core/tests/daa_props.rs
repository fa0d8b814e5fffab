use jumpsim::difficulty::improved::{evaluate, SurgeGuard};
use jumpsim::difficulty::{retarget, DaaAlgorithm};
use jumpsim::{BlockRecord, DaaConfig, Difficulty, SolveTime, Target};
use num_bigint::BigUint;
use proptest::prelude::*;

fn history(diffs: &[f64], times: &[f64]) -> Vec<BlockRecord> {
    diffs
        .iter()
        .zip(times)
        .enumerate()
        .map(|(i, (&d, &t))| {
            BlockRecord::basic(i as u64 + 1, Difficulty::new(d).unwrap(), SolveTime::new(t).unwrap()).unwrap()
        })
        .collect()
}

fn histories(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..max_len).prop_flat_map(|len| {
        (
            prop::collection::vec(0.2f64..50.0, len),
            prop::collection::vec(prop_oneof![0.5f64..100.0, 100.0f64..2000.0, 2000.0f64..50_000.0], len),
        )
    })
}

fn small_window(alg: DaaAlgorithm) -> DaaConfig {
    let window = match alg {
        DaaAlgorithm::BitcoinEpoch => 8,
        DaaAlgorithm::ImprovedAntiAttack => 12,
        _ => 6,
    };
    DaaConfig::new(alg, 600.0).with_window(window)
}

proptest! {
    #[test]
    fn every_daa_stays_within_pow_limit((diffs, times) in histories(40), limit in 0.02f64..0.2) {
        // Valid histories lie within the limit: every difficulty is at least 0.2.
        let pow_limit = Target::from_difficulty(Difficulty::new(limit).unwrap()).unwrap();
        for alg in DaaAlgorithm::ALL {
            let cfg = small_window(alg).with_pow_limit(pow_limit.clone());
            let h = history(&diffs, &times);
            let next = retarget(&h, h.len() as u64 + 1, &cfg).unwrap();
            prop_assert!(next.difficulty.get() > 0.0);
            prop_assert!(next.target <= pow_limit, "{:?}", alg);
        }
    }

    #[test]
    fn bitcoin_changes_only_at_boundaries((diffs, times) in histories(40)) {
        let cfg = small_window(DaaAlgorithm::BitcoinEpoch);
        let h = history(&diffs, &times);
        let next_height = h.len() as u64 + 1;
        let prev = h.last().unwrap().difficulty.get();
        let next = retarget(&h, next_height, &cfg).unwrap().difficulty.get();
        if !next_height.is_multiple_of(cfg.window as u64) {
            prop_assert_eq!(next, prev);
        } else {
            let ratio = next / prev;
            prop_assert!((0.25 * (1.0 - 1e-15)..=4.0 * (1.0 + 1e-15)).contains(&ratio));
        }
    }

    #[test]
    fn bch_ratio_is_bounded((diffs, times) in histories(40)) {
        let cfg = small_window(DaaAlgorithm::Bch144);
        let h = history(&diffs, &times);
        let prev = h.last().unwrap().difficulty.get();
        let ratio = retarget(&h, h.len() as u64 + 1, &cfg).unwrap().difficulty.get() / prev;
        prop_assert!((0.5 * (1.0 - 1e-15)..=2.0 * (1.0 + 1e-15)).contains(&ratio));
    }

    #[test]
    fn improved_guards_hold((diffs, times) in histories(60), burst in any::<bool>()) {
        let mut times = times;
        if burst {
            let n = times.len();
            for t in times.iter_mut().skip(n.saturating_sub(5)) {
                *t = (*t).min(170.0);
            }
        }
        let cfg = DaaConfig::new(DaaAlgorithm::ImprovedAntiAttack, 600.0).with_window(20);
        let h = history(&diffs, &times);
        let step = evaluate(&h, &cfg).unwrap();
        let last = h.last().unwrap().target.value();
        prop_assert!(step.target.value() * 10u32 <= last * 13u32);

        // Padded last-5 window.
        let padded: Vec<&BlockRecord> = std::iter::repeat_n(&h[0], 20usize.saturating_sub(h.len()))
            .chain(h.iter().rev().take(20).rev())
            .collect();
        let last5 = &padded[padded.len() - 5..];
        let last5_us: u128 = last5.iter().map(|r| (r.solve_time.seconds() * 1e6).round() as u128).sum();
        if 2 * last5_us <= 3 * 600_000_000 {
            let avg5: BigUint = last5.iter().map(|r| r.target.value()).sum::<BigUint>() / 5u32;
            prop_assert!(step.target.value() <= &(avg5 / 4u32));
            prop_assert_eq!(step.surge_guard, Some(SurgeGuard::Last5Quarter));
        }
    }
}
