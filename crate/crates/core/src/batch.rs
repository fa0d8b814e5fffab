//! Batches of independent runs and sampler draws.
//!
//! With the `parallel` feature (on by default) work is spread over the rayon
//! thread pool; without it everything runs on the calling thread. Both paths
//! return identical results in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::engine::{run, ChainState, SimConfig};
use crate::metrics::{summarize, RunSummary};
use crate::sampler::{get_solve_time, HashRate, RngStream};
use crate::target::Difficulty;
use crate::Result;

/// Draws per RNG stream in [`sample_solve_times`].
pub const DRAW_CHUNK: usize = 1 << 14;

pub fn run_batch(configs: &[SimConfig]) -> Vec<Result<ChainState>> {
    #[cfg(feature = "parallel")]
    {
        run_batch_parallel(configs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_sequential(configs)
    }
}

pub fn run_batch_sequential(configs: &[SimConfig]) -> Vec<Result<ChainState>> {
    configs.iter().map(run).collect()
}

#[cfg(feature = "parallel")]
pub fn run_batch_parallel(configs: &[SimConfig]) -> Vec<Result<ChainState>> {
    configs.par_iter().map(run).collect()
}

/// Runs and summarises each config, measuring hashrate in its worker units.
pub fn summarize_batch(configs: &[SimConfig]) -> Vec<Result<RunSummary>> {
    let one = |cfg: &SimConfig| run(cfg).and_then(|chain| summarize(&chain, &cfg.miners, cfg.worker_hashrate()));
    #[cfg(feature = "parallel")]
    {
        configs.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        configs.iter().map(one).collect()
    }
}

/// `count` independent solve times. Draw chunk `k` (of [`DRAW_CHUNK`]
/// draws) comes from stream `k` of `seed`, so the output does not depend on
/// how chunks are scheduled.
pub fn sample_solve_times(hashrate: HashRate, difficulty: Difficulty, seed: u64, count: usize) -> Result<Vec<f64>> {
    let chunks = count.div_ceil(DRAW_CHUNK);
    let chunk = |k: usize| -> Result<Vec<f64>> {
        let len = DRAW_CHUNK.min(count - k * DRAW_CHUNK);
        let mut rng = RngStream::with_stream(seed, k as u64);
        (0..len)
            .map(|_| get_solve_time(hashrate, rng.next_uniform(), difficulty).map(|s| s.seconds()))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Vec<f64>>> = (0..chunks).into_par_iter().map(chunk).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Vec<f64>>> = (0..chunks).map(chunk).collect();

    let mut out = Vec::with_capacity(count);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}
