//! Difficulty adjustment algorithms.
//!
//! Every algorithm maps the trailing block history to the work required of
//! the next block. [`retarget`] dispatches on [`DaaConfig::algorithm`].
//!
//! The target-based algorithms (DigiShield, BTG weighted, improved) work in
//! exact integer arithmetic on 256-bit targets. Solve times enter that
//! arithmetic in whole microseconds (rounded to nearest) and the `adjust`
//! factor in parts per million. The Bitcoin and BCH-style algorithms scale
//! the difficulty directly.

use serde::{Deserialize, Serialize};

use crate::sampler::{HashRate, SolveTime};
use crate::strategy::MinerId;
use crate::target::{difficulty_from_target, Difficulty, Target};
use crate::{Error, Result};

mod bch;
mod bitcoin;
mod btg;
mod digishield;
pub mod improved;

pub use bch::next_difficulty_bch;
pub use bitcoin::next_difficulty_bitcoin;
pub use btg::{next_difficulty_btg_weighted, next_target_btg_weighted};
pub use digishield::{next_difficulty_digishield, next_target_digishield};
pub use improved::{next_difficulty_improved, next_target_improved};

/// Microseconds per second; solve times and block times are integers in
/// this unit inside target arithmetic.
pub const MICROS_PER_SECOND: u128 = 1_000_000;

/// Denominator of the fixed-point `adjust` factor.
pub const ADJUST_SCALE: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DaaAlgorithm {
    /// Retarget every 2016 blocks, ratio clamped to [0.25, 4].
    BitcoinEpoch,
    /// Per-block retarget over 144 blocks, ratio clamped to [0.5, 2].
    Bch144,
    /// Zcash-style DigiShield over 17 blocks.
    #[serde(rename = "digishield17")]
    DigiShield17,
    /// Linearly weighted solve times, mean target.
    BtgWeighted,
    /// Weighted retarget with surge and fall guards.
    ImprovedAntiAttack,
}

impl DaaAlgorithm {
    pub const ALL: [DaaAlgorithm; 5] = [
        DaaAlgorithm::BitcoinEpoch,
        DaaAlgorithm::Bch144,
        DaaAlgorithm::DigiShield17,
        DaaAlgorithm::BtgWeighted,
        DaaAlgorithm::ImprovedAntiAttack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DaaAlgorithm::BitcoinEpoch => "bitcoin_epoch",
            DaaAlgorithm::Bch144 => "bch144",
            DaaAlgorithm::DigiShield17 => "digishield17",
            DaaAlgorithm::BtgWeighted => "btg_weighted",
            DaaAlgorithm::ImprovedAntiAttack => "improved_anti_attack",
        }
    }

    pub fn default_window(self) -> usize {
        match self {
            DaaAlgorithm::BitcoinEpoch => 2016,
            DaaAlgorithm::Bch144 => 144,
            DaaAlgorithm::DigiShield17 => 17,
            DaaAlgorithm::BtgWeighted | DaaAlgorithm::ImprovedAntiAttack => 45,
        }
    }

    /// Per-retarget clamp on the difficulty ratio, for the algorithms that
    /// scale difficulty directly.
    pub fn default_ratio_bounds(self) -> (f64, f64) {
        match self {
            DaaAlgorithm::BitcoinEpoch => (0.25, 4.0),
            DaaAlgorithm::Bch144 => (0.5, 2.0),
            _ => (0.0, f64::INFINITY),
        }
    }
}

impl std::str::FromStr for DaaAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DaaAlgorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config("daa", format!("unknown algorithm `{s}`")))
    }
}

/// DigiShield v3 constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigiShieldParams {
    /// The observed timespan moves toward the expected one by `1/damping`.
    pub damping: u32,
    /// Largest per-retarget difficulty increase, as a percent cut in timespan.
    pub max_adjust_up_pct: u32,
    /// Largest per-retarget difficulty decrease, as a percent gain in timespan.
    pub max_adjust_down_pct: u32,
}

impl Default for DigiShieldParams {
    fn default() -> Self {
        DigiShieldParams {
            damping: 4,
            max_adjust_up_pct: 16,
            max_adjust_down_pct: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaaConfig {
    pub algorithm: DaaAlgorithm,
    /// Expected seconds per block (`T`).
    pub target_block_time: f64,
    /// Trailing blocks consulted (`N`); the retarget interval for Bitcoin.
    pub window: usize,
    /// Damping factor in `(0, 1]` used by the weighted algorithms.
    pub adjust: f64,
    pub pow_limit: Target,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub digishield: DigiShieldParams,
}

pub const DEFAULT_ADJUST: f64 = 0.998;

impl DaaConfig {
    pub fn new(algorithm: DaaAlgorithm, target_block_time: f64) -> Self {
        let (min_ratio, max_ratio) = algorithm.default_ratio_bounds();
        DaaConfig {
            algorithm,
            target_block_time,
            window: algorithm.default_window(),
            adjust: DEFAULT_ADJUST,
            pow_limit: Target::default_pow_limit(),
            min_ratio,
            max_ratio,
            digishield: DigiShieldParams::default(),
        }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_adjust(mut self, adjust: f64) -> Self {
        self.adjust = adjust;
        self
    }

    pub fn with_pow_limit(mut self, pow_limit: Target) -> Self {
        self.pow_limit = pow_limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_block_time.is_finite() && self.target_block_time > 0.0) {
            return Err(Error::config("target_block_time", "must be positive"));
        }
        if self.target_micros() == 0 {
            return Err(Error::config("target_block_time", "must be at least one microsecond"));
        }
        if self.window == 0 {
            return Err(Error::config("window", "must be at least 1"));
        }
        if self.algorithm == DaaAlgorithm::ImprovedAntiAttack && self.window < 10 {
            return Err(Error::config("window", "improved_anti_attack needs at least 10 blocks"));
        }
        if !(self.adjust > 0.0 && self.adjust <= 1.0) || self.adjust_ppm() == 0 {
            return Err(Error::config(
                "adjust",
                format!("must lie in (0, 1], got {}", self.adjust),
            ));
        }
        if !(self.min_ratio >= 0.0 && self.min_ratio <= 1.0) {
            return Err(Error::config("min_ratio", "must lie in [0, 1]"));
        }
        if self.max_ratio.is_nan() || self.max_ratio < 1.0 {
            return Err(Error::config("max_ratio", "must be at least 1"));
        }
        let ds = &self.digishield;
        if ds.damping == 0 {
            return Err(Error::config("digishield_damping", "must be at least 1"));
        }
        if ds.max_adjust_up_pct >= 100 {
            return Err(Error::config("digishield_max_adjust_up", "must be below 100"));
        }
        Ok(())
    }

    /// `T` in microseconds.
    pub fn target_micros(&self) -> u128 {
        micros(self.target_block_time)
    }

    /// `adjust` scaled by [`ADJUST_SCALE`].
    pub fn adjust_ppm(&self) -> u128 {
        (self.adjust * ADJUST_SCALE as f64).round() as u128
    }

    /// Lowest difficulty allowed by `pow_limit`.
    pub fn min_difficulty(&self) -> f64 {
        difficulty_from_target(&self.pow_limit)
    }
}

/// One mined block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub height: u64,
    pub difficulty: Difficulty,
    /// Target the block was mined at; `difficulty` is derived from it or
    /// vice versa, depending on the algorithm.
    pub target: Target,
    pub solve_time: SolveTime,
    pub winner: MinerId,
    /// True iff at least one non-always-on miner mined this block.
    pub attacker_active: bool,
    pub total_hashrate: HashRate,
    /// Bit `i` is set iff miner `i` was active.
    pub active_mask: u64,
}

impl BlockRecord {
    /// A record for DAA inputs and tests: winner 0, honest only.
    pub fn basic(height: u64, difficulty: Difficulty, solve_time: SolveTime) -> Result<Self> {
        Ok(BlockRecord {
            height,
            target: Target::from_difficulty(difficulty)?,
            difficulty,
            solve_time,
            winner: MinerId(0),
            attacker_active: false,
            total_hashrate: HashRate::new(1.0)?,
            active_mask: 1,
        })
    }

    /// Like [`BlockRecord::basic`] but keyed by an exact target.
    pub fn with_target(height: u64, target: Target, solve_time: SolveTime) -> Result<Self> {
        Ok(BlockRecord {
            height,
            difficulty: Difficulty::from_target(&target),
            target,
            solve_time,
            winner: MinerId(0),
            attacker_active: false,
            total_hashrate: HashRate::new(1.0)?,
            active_mask: 1,
        })
    }

    pub fn is_active(&self, miner: MinerId) -> bool {
        miner.0 < 64 && self.active_mask & (1u64 << miner.0) != 0
    }
}

/// Work assigned to the next block.
#[derive(Debug, Clone, PartialEq)]
pub struct NextWork {
    pub difficulty: Difficulty,
    pub target: Target,
}

impl NextWork {
    fn from_target(target: Target) -> Self {
        NextWork {
            difficulty: Difficulty::from_target(&target),
            target,
        }
    }

    /// Clamps a directly-scaled difficulty to `pow_limit` and derives its target.
    fn from_difficulty(value: f64, cfg: &DaaConfig) -> Result<Self> {
        let min = cfg.min_difficulty();
        if value <= min {
            return Ok(NextWork::from_target(cfg.pow_limit.clone()));
        }
        let difficulty = Difficulty::new(value)?;
        Ok(NextWork {
            target: Target::from_difficulty(difficulty)?,
            difficulty,
        })
    }
}

/// Work for the block at `next_height`, given every earlier block.
pub fn retarget(history: &[BlockRecord], next_height: u64, cfg: &DaaConfig) -> Result<NextWork> {
    match cfg.algorithm {
        DaaAlgorithm::BitcoinEpoch => bitcoin::retarget(history, next_height, cfg),
        DaaAlgorithm::Bch144 => bch::retarget(history, cfg),
        DaaAlgorithm::DigiShield17 => next_target_digishield(history, cfg).map(NextWork::from_target),
        DaaAlgorithm::BtgWeighted => next_target_btg_weighted(history, cfg).map(NextWork::from_target),
        DaaAlgorithm::ImprovedAntiAttack => next_target_improved(history, cfg).map(NextWork::from_target),
    }
}

/// Whole microseconds, rounded to nearest.
pub fn micros(seconds: f64) -> u128 {
    (seconds * MICROS_PER_SECOND as f64).round() as u128
}

fn tail(history: &[BlockRecord], n: usize) -> &[BlockRecord] {
    &history[history.len().saturating_sub(n)..]
}

fn require_history(history: &[BlockRecord], algorithm: DaaAlgorithm) -> Result<()> {
    if history.is_empty() {
        Err(Error::InsufficientHistory(format!(
            "{} needs at least one block",
            algorithm.name()
        )))
    } else {
        Ok(())
    }
}
