//! Straight-line reference versions of the sampler, the retargets and the
//! attack loop, written without the library's DAA, sampler or engine code. Only the
//! target/difficulty conversions are shared.
#![allow(dead_code, clippy::int_plus_one, clippy::collapsible_if, clippy::too_many_arguments)]

use jumpsim::target::difficulty_from_target;
use jumpsim::{Difficulty, Target};
use num_bigint::BigUint;

pub const LZ: f64 = 1_099_511_627_776.0;

fn us(seconds: f64) -> u128 {
    (seconds * 1e6).round() as u128
}

fn ppm(adjust: f64) -> u128 {
    (adjust * 1e6).round() as u128
}

/// ST = ceil(log(1 - Rand) / log(1 - p)) / HR with p = 1 / (D * Lz).
pub fn reference_solve_time(hr: f64, rand: f64, d: f64) -> f64 {
    let p = 1.0 / (d * LZ);
    let n = ((-rand).ln_1p() / (-p).ln_1p()).ceil();
    let n = if n < 1.0 { 1.0 } else { n };
    n / hr
}

/// Improved retarget, with the last-10 and last-5 sums accumulated
/// independently and the window padded with its first entry.
pub fn reference_improved_target(
    st: &[f64],
    targets: &[BigUint],
    n: usize,
    t: f64,
    adjust: f64,
    pow_limit: &BigUint,
) -> BigUint {
    let len = st.len();
    let t_us = us(t);
    let mut sum_time: u128 = 0;
    let mut sum_target = BigUint::from(0u32);
    let mut sum_last10_time: u128 = 0;
    let mut sum_last10_target = BigUint::from(0u32);
    let mut sum_last5_time: u128 = 0;
    let mut sum_last5_target = BigUint::from(0u32);
    for i in 1..=n {
        let idx = (len + i) as i64 - n as i64 - 1;
        let idx = if idx < 0 { 0 } else { idx as usize };
        let solvetime = us(st[idx]);
        let target = &targets[idx];
        sum_time += solvetime * i as u128;
        sum_target += target;
        if i >= n - 10 + 1 {
            sum_last10_time += solvetime;
            sum_last10_target += target;
        }
        if i >= n - 5 + 1 {
            sum_last5_time += solvetime;
            sum_last5_target += target;
        }
    }
    let nn = n as u128;
    if sum_time < nn * nn * t_us / 6 {
        sum_time = nn * nn * t_us / 6;
    }
    let mut next_target =
        BigUint::from(2u32) * sum_time * ppm(adjust) * &sum_target / (nn * (nn + 1) * nn * t_us * 1_000_000u128);

    let avg_last5_target = sum_last5_target / 5u32;
    let avg_last10_target = sum_last10_target / 10u32;
    if sum_last5_time * 2 <= 3 * t_us {
        if next_target > &avg_last5_target / 4u32 {
            next_target = &avg_last5_target / 4u32;
        }
    } else if sum_last10_time <= 5 * t_us {
        if next_target > &avg_last10_target / 2u32 {
            next_target = &avg_last10_target / 2u32;
        }
    } else if sum_last10_time <= 10 * t_us {
        if next_target > &avg_last10_target * 2u32 / 3u32 {
            next_target = &avg_last10_target * 2u32 / 3u32;
        }
    }
    let last_target = &targets[len - 1];
    if next_target > last_target * 13u32 / 10u32 {
        next_target = last_target * 13u32 / 10u32;
    }
    if next_target > *pow_limit {
        next_target = pow_limit.clone();
    }
    if next_target == BigUint::from(0u32) {
        next_target = BigUint::from(1u32);
    }
    next_target
}

/// Linearly weighted average: sum_target * 2 * sum(i * st_i) / (n * n(n+1) * T * adjust).
pub fn btg_next_target(
    st: &[f64],
    targets: &[BigUint],
    window: usize,
    t: f64,
    adjust: f64,
    pow_limit: &BigUint,
) -> BigUint {
    let start = st.len().saturating_sub(window);
    let n = (st.len() - start) as u128;
    let mut weighted: u128 = 0;
    let mut sum_target = BigUint::from(0u32);
    for (k, idx) in (start..st.len()).enumerate() {
        weighted += (k as u128 + 1) * us(st[idx]);
        sum_target += &targets[idx];
    }
    let mut next = sum_target * (2 * weighted * 1_000_000) / (n * n * (n + 1) * us(t) * ppm(adjust));
    if next > *pow_limit {
        next = pow_limit.clone();
    }
    if next == BigUint::from(0u32) {
        next = BigUint::from(1u32);
    }
    next
}

/// DigiShield v3: mean target times the damped, clamped timespan over the expected one.
pub fn digishield_next_target(
    st: &[f64],
    targets: &[BigUint],
    window: usize,
    t: f64,
    damping: i128,
    up_pct: i128,
    down_pct: i128,
    pow_limit: &BigUint,
) -> BigUint {
    let start = st.len().saturating_sub(window);
    let n = st.len() - start;
    let mut sum_target = BigUint::from(0u32);
    let mut actual: i128 = 0;
    for idx in start..st.len() {
        sum_target += &targets[idx];
        actual += us(st[idx]) as i128;
    }
    let mean = sum_target / n as u32;
    let expected = n as i128 * us(t) as i128;
    let mut span = expected + (actual - expected) / damping;
    let lo = expected * (100 - up_pct) / 100;
    let hi = expected * (100 + down_pct) / 100;
    if span < lo {
        span = lo;
    }
    if span > hi {
        span = hi;
    }
    let mut next = mean * span as u128 / expected as u128;
    if next > *pow_limit {
        next = pow_limit.clone();
    }
    if next == BigUint::from(0u32) {
        next = BigUint::from(1u32);
    }
    next
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OracleDaa {
    Bitcoin,
    Bch,
    DigiShield,
    Btg,
    Improved,
}

#[derive(Clone, Debug)]
pub struct ReferenceParams {
    pub daa: OracleDaa,
    pub window: usize,
    pub t: f64,
    pub adjust: f64,
    pub base_d: f64,
    pub attacker_multi: f64,
    pub attack_in: f64,
    pub attack_out: f64,
}

pub struct ReferenceTrace {
    pub dseri: Vec<f64>,
    pub stseri: Vec<f64>,
    pub attacking: Vec<bool>,
}

/// Honest miner plus threshold jumper, driven by a fixed list of uniform draws.
pub fn reference_run(params: &ReferenceParams, rnd_seri: &[f64]) -> ReferenceTrace {
    let pow_limit = BigUint::from(1u32) << 224u32;
    let hr_worker = params.base_d * LZ / params.t;
    let hr_attacker = hr_worker * params.attacker_multi;
    let mut dseri: Vec<f64> = Vec::new();
    let mut tseri: Vec<BigUint> = Vec::new();
    let mut stseri: Vec<f64> = Vec::new();
    let mut attacking = Vec::new();
    let mut attack_position = 0;

    for i in 1..=rnd_seri.len() {
        let prev_d = if i == 1 { params.base_d } else { dseri[i - 2] };
        if attack_position == 0 && prev_d < params.attack_in * params.base_d {
            attack_position = 1;
        } else if attack_position == 1 && prev_d > params.attack_out * params.base_d {
            attack_position = 0;
        }
        let hr_now = hr_worker + if attack_position == 1 { hr_attacker } else { 0.0 };

        let (d, target) = if i == 1 {
            let g = Difficulty::new(params.base_d).unwrap();
            (params.base_d, Target::from_difficulty(g).unwrap().into_value())
        } else {
            match params.daa {
                OracleDaa::Bitcoin => {
                    let prev = dseri[i - 2];
                    let d = if i % params.window == 0 {
                        let start = stseri.len().saturating_sub(params.window);
                        let mut actual = 0.0;
                        for st in &stseri[start..] {
                            actual += st;
                        }
                        let expected = (stseri.len() - start) as f64 * params.t;
                        prev * (expected / actual).clamp(0.25, 4.0)
                    } else {
                        prev
                    };
                    by_difficulty(d, prev, &tseri[i - 2])
                }
                OracleDaa::Bch => {
                    let prev = dseri[i - 2];
                    let start = stseri.len().saturating_sub(params.window);
                    let (mut sd, mut stt) = (0.0, 0.0);
                    for k in start..stseri.len() {
                        sd += dseri[k];
                        stt += stseri[k];
                    }
                    let n = (stseri.len() - start) as f64;
                    let estimate = (sd / n) * (n * params.t) / stt;
                    let d = prev * (estimate / prev).clamp(0.5, 2.0);
                    by_difficulty(d, prev, &tseri[i - 2])
                }
                OracleDaa::DigiShield => by_target(digishield_next_target(
                    &stseri,
                    &tseri,
                    params.window,
                    params.t,
                    4,
                    16,
                    32,
                    &pow_limit,
                )),
                OracleDaa::Btg => by_target(btg_next_target(
                    &stseri,
                    &tseri,
                    params.window,
                    params.t,
                    params.adjust,
                    &pow_limit,
                )),
                OracleDaa::Improved => by_target(reference_improved_target(
                    &stseri,
                    &tseri,
                    params.window,
                    params.t,
                    params.adjust,
                    &pow_limit,
                )),
            }
        };
        let st = reference_solve_time(hr_now, rnd_seri[i - 1], d);
        dseri.push(d);
        tseri.push(target);
        stseri.push(st);
        attacking.push(attack_position == 1);
    }
    ReferenceTrace {
        dseri,
        stseri,
        attacking,
    }
}

fn by_difficulty(d: f64, prev: f64, prev_target: &BigUint) -> (f64, BigUint) {
    if d == prev {
        return (d, prev_target.clone());
    }
    (
        d,
        Target::from_difficulty(Difficulty::new(d).unwrap())
            .unwrap()
            .into_value(),
    )
}

fn by_target(t: BigUint) -> (f64, BigUint) {
    let target = Target::new(t).unwrap();
    (difficulty_from_target(&target), target.into_value())
}
