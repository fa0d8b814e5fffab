//! Per-class block times, mining efficiency and attack episodes.
//!
//! A class's efficiency is the blocks it won per second of active mining per
//! worker unit of hashrate: `blocks_won / (active_time * relative_hashrate)`,
//! equivalently `1 / (avg_block_time * relative_hashrate)`.

use serde::{Deserialize, Serialize};

use crate::engine::ChainState;
use crate::sampler::HashRate;
use crate::strategy::{MinerId, MinerSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub name: String,
    /// Hashrate in units of the worker hashrate.
    pub relative_hashrate: f64,
    pub blocks_won: u64,
    /// Sum of solve times of the blocks during which the class mined.
    pub active_time_s: f64,
    /// `active_time_s / blocks_won`; absent when no block was won.
    pub avg_block_time_s: Option<f64>,
    pub efficiency: f64,
}

/// A maximal run of consecutive blocks with `attacker_active` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackEpisode {
    pub start_height: u64,
    pub end_height: u64,
    pub mean_difficulty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub num_blocks: u64,
    pub total_time_s: f64,
    pub mean_solve_time_s: f64,
    pub classes: Vec<ClassSummary>,
    pub attack_episodes: Vec<AttackEpisode>,
}

impl RunSummary {
    pub fn class(&self, name: &str) -> Option<&ClassSummary> {
        self.classes.iter().find(|c| c.name == name)
    }
}

/// Summarises `chain`, measuring hashrates in units of `worker_hashrate`.
pub fn summarize(chain: &ChainState, miners: &[MinerSpec], worker_hashrate: HashRate) -> Result<RunSummary> {
    if chain.is_empty() {
        return Err(Error::domain("cannot summarise an empty chain"));
    }
    let mut won = vec![0u64; miners.len()];
    let mut active_time = vec![0.0f64; miners.len()];
    for r in &chain.records {
        let w = r.winner.0 as usize;
        if w >= miners.len() {
            return Err(Error::domain(format!("block {} won by unknown miner {w}", r.height)));
        }
        won[w] += 1;
        let st = r.solve_time.seconds();
        for (i, t) in active_time.iter_mut().enumerate() {
            if r.is_active(MinerId(i as u16)) {
                *t += st;
            }
        }
    }

    let classes = miners
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let relative_hashrate = m.hashrate.get() / worker_hashrate.get();
            let blocks_won = won[i];
            let active_time_s = active_time[i];
            let (avg_block_time_s, efficiency) = if blocks_won > 0 {
                let avg = active_time_s / blocks_won as f64;
                (Some(avg), 1.0 / (avg * relative_hashrate))
            } else {
                (None, 0.0)
            };
            ClassSummary {
                name: m.name.clone(),
                relative_hashrate,
                blocks_won,
                active_time_s,
                avg_block_time_s,
                efficiency,
            }
        })
        .collect();

    let total_time_s = chain.total_time();
    Ok(RunSummary {
        num_blocks: chain.len() as u64,
        total_time_s,
        mean_solve_time_s: total_time_s / chain.len() as f64,
        classes,
        attack_episodes: attack_episodes(chain),
    })
}

pub fn attack_episodes(chain: &ChainState) -> Vec<AttackEpisode> {
    let mut episodes = Vec::new();
    let mut current: Option<(u64, u64, f64, u64)> = None;
    for r in &chain.records {
        match (&mut current, r.attacker_active) {
            (Some((_, end, sum, n)), true) => {
                *end = r.height;
                *sum += r.difficulty.get();
                *n += 1;
            }
            (None, true) => current = Some((r.height, r.height, r.difficulty.get(), 1)),
            (Some(_), false) => {
                let (start, end, sum, n) = current.take().unwrap();
                episodes.push(AttackEpisode {
                    start_height: start,
                    end_height: end,
                    mean_difficulty: sum / n as f64,
                });
            }
            (None, false) => {}
        }
    }
    if let Some((start, end, sum, n)) = current {
        episodes.push(AttackEpisode {
            start_height: start,
            end_height: end,
            mean_difficulty: sum / n as f64,
        });
    }
    episodes
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub height: u64,
    pub difficulty: f64,
    pub hashrate: f64,
    pub attacker_active: bool,
}

pub fn difficulty_series(chain: &ChainState) -> Vec<SeriesPoint> {
    chain
        .records
        .iter()
        .map(|r| SeriesPoint {
            height: r.height,
            difficulty: r.difficulty.get(),
            hashrate: r.total_hashrate.get(),
            attacker_active: r.attacker_active,
        })
        .collect()
}
