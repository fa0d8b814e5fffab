//! Simulation of proof-of-work mining under difficulty adjustment algorithms
//! (DAAs), with hashrate-switching ("jumping") attackers.
//!
//! Block solve times are sampled from the geometric distribution of the
//! number of hash evaluations needed to meet a target, so no hashing happens.
//! Difficulty is measured in units of [`LZ`] = 2^40 expected hashes.
//!
//! The crate is organised bottom-up:
//!
//! * [`sampler`]: seedable uniform streams and the inverse-CDF solve-time sampler.
//! * [`target`]: 256-bit targets, difficulties and compact (`nBits`) encoding.
//! * [`difficulty`]: the five retarget algorithms behind [`difficulty::retarget`].
//! * [`strategy`]: per-block participation decisions for each miner class.
//! * [`engine`]: the block-by-block simulation loop.
//! * [`metrics`]: per-class block times, efficiencies and attack episodes.
//! * [`chaindata`]: header export ingestion and attack-region detection.
//! * [`batch`]: data-parallel batches of runs and sampler draws.

pub mod batch;
pub mod chaindata;
pub mod difficulty;
pub mod engine;
mod error;
pub mod metrics;
pub mod sampler;
pub mod strategy;
pub mod target;

pub use difficulty::{BlockRecord, DaaAlgorithm, DaaConfig, DigiShieldParams};
pub use engine::{replay_rand_sequence, run, ChainState, SimConfig};
pub use error::{Error, Result};
pub use metrics::{summarize, ClassSummary, RunSummary};
pub use sampler::{HashRate, RngStream, SolveTime, LZ};
pub use strategy::{MinerId, MinerSpec, ParticipationState, Strategy};
pub use target::{Difficulty, Target};
