//! Block-by-block simulation loop.
//!
//! For each height `i = 1..=num_blocks`:
//!
//! 1. every miner updates its participation from the difficulty of block `i - 1`;
//! 2. the active hashrates are summed;
//! 3. the DAA sets the difficulty of block `i` from blocks `1..i`;
//! 4. a solve time is sampled from one uniform draw;
//! 5. the winner is drawn among active miners in proportion to hashrate.
//!
//! Block 0 is the implicit genesis at `genesis_difficulty`; it carries no
//! solve time and is not stored. Block 1 is mined at the genesis difficulty.
//!
//! Solve-time draws come from stream 0 of the seed and winner draws from
//! stream 1, so the solve-time sequence does not depend on how many miners
//! there are.

use std::collections::HashSet;

use crate::difficulty::{retarget, BlockRecord, DaaConfig, NextWork};
use crate::sampler::{get_solve_time, HashRate, RngStream, LZ};
use crate::strategy::{decide_participation, MinerId, MinerSpec};
use crate::target::{Difficulty, Target};
use crate::{Error, Result};

/// Most miners a run may have; participation is tracked in a 64-bit mask.
pub const MAX_MINERS: usize = 64;

pub const SOLVE_TIME_STREAM: u64 = 0;
pub const WINNER_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub daa: DaaConfig,
    pub miners: Vec<MinerSpec>,
    pub num_blocks: u64,
    pub seed: u64,
    pub genesis_difficulty: Difficulty,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.daa.validate()?;
        if self.num_blocks == 0 {
            return Err(Error::config("num_blocks", "must be at least 1"));
        }
        if self.miners.is_empty() {
            return Err(Error::config("miners", "at least one miner is required"));
        }
        if self.miners.len() > MAX_MINERS {
            return Err(Error::config(
                "miners",
                format!("at most {MAX_MINERS} miners are supported"),
            ));
        }
        if !self.miners.iter().any(|m| m.strategy.is_always_on()) {
            return Err(Error::config("miners", "at least one always_on miner is required"));
        }
        let mut names = HashSet::new();
        for m in &self.miners {
            m.validate()?;
            if !names.insert(m.name.as_str()) {
                return Err(Error::config("miners", format!("duplicate miner name `{}`", m.name)));
            }
        }
        if Target::from_difficulty(self.genesis_difficulty)? > self.daa.pow_limit {
            return Err(Error::config("genesis_difficulty", "is below the pow_limit difficulty"));
        }
        Ok(())
    }

    /// Hashrate that mines at `T` per block at the genesis difficulty; the
    /// unit of relative hashrate in metrics.
    pub fn worker_hashrate(&self) -> HashRate {
        HashRate::new(self.genesis_difficulty.get() * LZ / self.daa.target_block_time)
            .expect("validated config has positive genesis difficulty and block time")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainState {
    pub records: Vec<BlockRecord>,
}

impl ChainState {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sum of all solve times.
    pub fn total_time(&self) -> f64 {
        self.records.iter().map(|r| r.solve_time.seconds()).sum()
    }
}

/// Simulates `config.num_blocks` blocks.
pub fn run(config: &SimConfig) -> Result<ChainState> {
    let mut solve = RngStream::with_stream(config.seed, SOLVE_TIME_STREAM);
    simulate(config, || Ok(solve.next_uniform()))
}

/// Like [`run`], with the solve-time draws supplied by the caller.
/// Winner draws still come from the seed.
pub fn replay_rand_sequence(config: &SimConfig, rands: &[f64]) -> Result<ChainState> {
    if rands.len() as u64 != config.num_blocks {
        return Err(Error::config(
            "rands",
            format!("expected {} draws, got {}", config.num_blocks, rands.len()),
        ));
    }
    let mut it = rands.iter();
    simulate(config, || {
        it.next()
            .copied()
            .ok_or_else(|| Error::Internal("ran out of draws".into()))
    })
}

fn simulate(config: &SimConfig, mut next_rand: impl FnMut() -> Result<f64>) -> Result<ChainState> {
    config.validate()?;
    let mut winners = RngStream::with_stream(config.seed, WINNER_STREAM);
    let mut states: Vec<_> = config.miners.iter().map(|m| m.strategy.initial_state()).collect();
    let genesis = NextWork {
        difficulty: config.genesis_difficulty,
        target: Target::from_difficulty(config.genesis_difficulty)?,
    };
    let mut records: Vec<BlockRecord> = Vec::with_capacity(config.num_blocks as usize);

    for height in 1..=config.num_blocks {
        let prev_difficulty = records.last().map_or(config.genesis_difficulty, |r| r.difficulty);
        let mut hashrate = 0.0;
        let mut active_mask = 0u64;
        let mut attacker_active = false;
        for (i, (miner, state)) in config.miners.iter().zip(states.iter_mut()).enumerate() {
            *state = decide_participation(miner, *state, height, prev_difficulty);
            if state.active {
                hashrate += miner.hashrate.get();
                active_mask |= 1 << i;
                attacker_active |= !miner.strategy.is_always_on();
            }
        }
        let total_hashrate =
            HashRate::new(hashrate).map_err(|_| Error::Internal(format!("no active hashrate at height {height}")))?;

        let work = if records.is_empty() {
            genesis.clone()
        } else {
            retarget(&records, height, &config.daa)?
        };
        let solve_time = get_solve_time(total_hashrate, next_rand()?, work.difficulty)?;
        let winner = draw_winner(&config.miners, active_mask, hashrate, winners.next_uniform());

        records.push(BlockRecord {
            height,
            difficulty: work.difficulty,
            target: work.target,
            solve_time,
            winner,
            attacker_active,
            total_hashrate,
            active_mask,
        });
    }
    Ok(ChainState { records })
}

/// First active miner whose cumulative hashrate exceeds `u * total`.
fn draw_winner(miners: &[MinerSpec], active_mask: u64, total: f64, u: f64) -> MinerId {
    let threshold = u * total;
    let mut cumulative = 0.0;
    let mut last = 0;
    for (i, m) in miners.iter().enumerate() {
        if active_mask & (1 << i) == 0 {
            continue;
        }
        cumulative += m.hashrate.get();
        last = i;
        if threshold < cumulative {
            break;
        }
    }
    MinerId(last as u16)
}
