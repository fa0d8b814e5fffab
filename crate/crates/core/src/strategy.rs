//! Per-block participation of each miner class.

use serde::{Deserialize, Serialize};

use crate::sampler::HashRate;
use crate::target::Difficulty;
use crate::{Error, Result};

/// Index of a miner within a [`crate::SimConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MinerId(pub u16);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    AlwaysOn,
    /// Mines while the previous block's difficulty is low: joins below
    /// `attack_in * base_difficulty`, leaves above `attack_out * base_difficulty`.
    ThresholdJumper {
        attack_in: f64,
        attack_out: f64,
        base_difficulty: Difficulty,
    },
    /// Flips between mining and idling at every multiple of `period`.
    EpochJumper {
        period: u64,
    },
}

impl Strategy {
    pub fn is_always_on(&self) -> bool {
        matches!(self, Strategy::AlwaysOn)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Strategy::AlwaysOn => Ok(()),
            Strategy::ThresholdJumper {
                attack_in, attack_out, ..
            } => {
                if !(attack_in.is_finite() && attack_out.is_finite() && attack_in > 0.0) {
                    return Err(Error::config("attack_in", "thresholds must be positive and finite"));
                }
                if attack_in >= attack_out {
                    return Err(Error::config(
                        "attack_in",
                        format!("must be below attack_out ({attack_in} >= {attack_out})"),
                    ));
                }
                Ok(())
            }
            Strategy::EpochJumper { period } => {
                if period == 0 {
                    Err(Error::config("period", "must be at least 1"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Participation at the start of a run: only always-on miners are active.
    pub fn initial_state(&self) -> ParticipationState {
        ParticipationState {
            active: self.is_always_on(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerSpec {
    pub name: String,
    pub hashrate: HashRate,
    pub strategy: Strategy,
}

impl MinerSpec {
    pub fn new(name: impl Into<String>, hashrate: HashRate, strategy: Strategy) -> Self {
        MinerSpec {
            name: name.into(),
            hashrate,
            strategy,
        }
    }

    pub fn always_on(name: impl Into<String>, hashrate: HashRate) -> Self {
        MinerSpec::new(name, hashrate, Strategy::AlwaysOn)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("name", "miner name must not be empty"));
        }
        self.strategy.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParticipationState {
    pub active: bool,
}

/// Participation for the block at `next_height`, given the difficulty of the
/// block before it. Both thresholds compare strictly; equality keeps the
/// current state.
pub fn decide_participation(
    spec: &MinerSpec,
    state: ParticipationState,
    next_height: u64,
    prev_difficulty: Difficulty,
) -> ParticipationState {
    let active = match spec.strategy {
        Strategy::AlwaysOn => true,
        Strategy::ThresholdJumper {
            attack_in,
            attack_out,
            base_difficulty,
        } => {
            let d = prev_difficulty.get();
            let base = base_difficulty.get();
            if !state.active && d < attack_in * base {
                true
            } else if state.active && d > attack_out * base {
                false
            } else {
                state.active
            }
        }
        Strategy::EpochJumper { period } => {
            if next_height.is_multiple_of(period) {
                !state.active
            } else {
                state.active
            }
        }
    };
    ParticipationState { active }
}
