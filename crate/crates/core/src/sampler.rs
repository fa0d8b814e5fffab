//! Geometric solve-time model.
//!
//! Finding a block is a sequence of independent hash trials, each succeeding
//! with probability `p = 1 / (D * LZ)`. The number of trials `n` is geometric,
//! so a uniform draw `u` is mapped to the smallest `n` with `P(n) >= u` where
//! `P(n) = 1 - (1 - p)^n`. The solve time is `n / hashrate`.
//!
//! `n` is carried as an `f64`. It is exact for `n < 2^53`; at the difficulties
//! used here (`D` up to a few thousand `LZ`) `n` stays below `2^52`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::target::Difficulty;
use crate::{Error, Result};

/// One difficulty unit: 2^40 expected hash evaluations.
pub const LZ: f64 = 1_099_511_627_776.0;

/// Largest `f64` strictly below 1. Uniform draws are clamped to it so that
/// `ln(1 - u)` stays finite.
const MAX_UNIFORM: f64 = 1.0 - f64::EPSILON / 2.0;

/// Above this trial count the survival function is evaluated through `exp`
/// rather than repeated multiplication.
const POWI_LIMIT: f64 = 1024.0;

/// Below this `p` one step of the CDF, a relative change of `p`, is too close
/// to the rounding error of the survival function to check it, and the
/// quotient is used as is.
const BOUNDARY_CHECK_MIN_P: f64 = 1.0 / (1u64 << 20) as f64;

/// Hash evaluations per second. Always positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HashRate(f64);

impl HashRate {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(HashRate(value))
        } else {
            Err(Error::domain(format!(
                "hashrate must be positive and finite, got {value}"
            )))
        }
    }

    /// Hashrate that finds blocks every `block_time` seconds on average at
    /// `difficulty`.
    pub fn for_block_time(difficulty: Difficulty, block_time: f64) -> Result<Self> {
        HashRate::new(difficulty.get() * LZ / block_time)
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HashRate {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        HashRate::new(value)
    }
}

impl From<HashRate> for f64 {
    fn from(h: HashRate) -> f64 {
        h.0
    }
}

/// Seconds taken to find one block. Always positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SolveTime(f64);

impl SolveTime {
    pub fn new(seconds: f64) -> Result<Self> {
        if seconds.is_finite() && seconds > 0.0 {
            Ok(SolveTime(seconds))
        } else {
            Err(Error::domain(format!(
                "solve time must be positive and finite, got {seconds}"
            )))
        }
    }

    #[inline]
    pub fn seconds(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SolveTime {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        SolveTime::new(value)
    }
}

impl From<SolveTime> for f64 {
    fn from(s: SolveTime) -> f64 {
        s.0
    }
}

/// A seeded stream of uniform draws in `[0, 1)`.
///
/// Backed by ChaCha8 keyed from the seed with `SeedableRng::seed_from_u64`.
/// Each draw takes the top 53 bits of one `u64` output, so the sequence for a
/// given `(seed, stream)` pair is fixed and part of the public contract.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    position: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// An independent stream under the same seed. Streams with different ids
    /// never overlap.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream {
            rng,
            seed,
            stream,
            position: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of draws taken so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn next_uniform(&mut self) -> f64 {
        self.position += 1;
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Probability that a single hash meets the target at `difficulty`.
pub fn success_probability(difficulty: Difficulty) -> Result<f64> {
    let p = 1.0 / (difficulty.get() * LZ);
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::domain(format!(
            "difficulty {} gives success probability {p}, outside (0, 1)",
            difficulty.get()
        )))
    }
}

/// Number of hash trials until the first success, by inverse CDF.
///
/// Returns the `n >= 1` with `P(n - 1) < rand <= P(n)`, computed as
/// `ceil(ln(1 - rand) / ln(1 - p))`. For `p >= 2^-20` the result is checked
/// against the survival function and moved by one step when the quotient
/// rounded across a boundary. `rand` values that round to 1 are clamped to
/// the largest double below 1.
pub fn sample_num_hashes(p: f64, rand: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("probability must lie in (0, 1), got {p}")));
    }
    if !(0.0..1.0).contains(&rand) {
        return Err(Error::domain(format!("uniform draw must lie in [0, 1), got {rand}")));
    }
    let rand = rand.min(MAX_UNIFORM);
    // ln(1 - p) via ln_1p keeps full precision for p near 2^-42.
    let log_q = (-p).ln_1p();
    let failure = 1.0 - rand;
    let mut n = ((-rand).ln_1p() / log_q).ceil().max(1.0);

    if p < BOUNDARY_CHECK_MIN_P {
        return Ok(n);
    }
    // The quotient can land one step off an exact CDF boundary.
    let survival = |k: f64| -> f64 {
        if k <= POWI_LIMIT {
            (1.0 - p).powi(k as i32)
        } else {
            (k * log_q).exp()
        }
    };
    if n > 1.0 && survival(n - 1.0) <= failure {
        n -= 1.0;
    } else if survival(n) > failure {
        n += 1.0;
    }
    Ok(n)
}

/// Time to find the next block with total hashrate `hashrate` at `difficulty`,
/// given one uniform draw.
pub fn get_solve_time(hashrate: HashRate, rand: f64, difficulty: Difficulty) -> Result<SolveTime> {
    let p = success_probability(difficulty)?;
    let n = sample_num_hashes(p, rand)?;
    SolveTime::new(n / hashrate.get())
}
