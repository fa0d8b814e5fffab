//! Scenario files.
//!
//! A scenario file is TOML. Every top-level table is one scenario, named by
//! its key; top-level plain keys are sweep settings and are ignored by
//! `simulate`:
//!
//! ```toml
//! seeds = [1, 2, 3]                 # sweep only
//! include = ["btg_equal.cfg"]       # sweep only, relative to this file
//!
//! [btg_equal]
//! daa = "btg_weighted"
//! target_block_time = 600
//! num_blocks = 100000
//! seed = 1
//! miners = [
//!   { name = "honest", hashrate = 1.0, strategy = "always_on" },
//!   { name = "attacker", hashrate = 1.0, strategy = "threshold_jumper", attack_in = 0.95, attack_out = 1.45 },
//! ]
//! ```
//!
//! Miner hashrates are in worker units: 1.0 mines one block per
//! `target_block_time` at `genesis_difficulty`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use jumpsim::difficulty::DaaAlgorithm;
use jumpsim::{DaaConfig, Difficulty, HashRate, MinerSpec, SimConfig, Strategy, Target};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub daa: String,
    pub target_block_time: f64,
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub adjust: Option<f64>,
    #[serde(default)]
    pub min_ratio: Option<f64>,
    #[serde(default)]
    pub max_ratio: Option<f64>,
    /// Lowest difficulty (in `LZ` units) the chain may fall to.
    #[serde(default)]
    pub min_difficulty: Option<f64>,
    #[serde(default)]
    pub digishield_damping: Option<u32>,
    #[serde(default)]
    pub digishield_max_adjust_up: Option<u32>,
    #[serde(default)]
    pub digishield_max_adjust_down: Option<u32>,
    #[serde(default = "default_genesis")]
    pub genesis_difficulty: f64,
    pub num_blocks: u64,
    #[serde(default)]
    pub seed: u64,
    pub miners: Vec<MinerEntry>,
}

fn default_genesis() -> f64 {
    4.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinerEntry {
    pub name: String,
    pub hashrate: f64,
    pub strategy: String,
    #[serde(default)]
    pub attack_in: Option<f64>,
    #[serde(default)]
    pub attack_out: Option<f64>,
    /// Threshold baseline; defaults to the genesis difficulty.
    #[serde(default)]
    pub base_difficulty: Option<f64>,
    #[serde(default)]
    pub period: Option<u64>,
}

/// One named scenario from a file.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub spec: ScenarioSpec,
}

impl Scenario {
    /// Builds the simulation config, optionally overriding seed and length.
    pub fn sim_config(&self, seed: Option<u64>, num_blocks: Option<u64>) -> Result<SimConfig, CliError> {
        let s = &self.spec;
        let field = |name: &str| format!("{}.{name}", self.name);
        let algorithm: DaaAlgorithm = s
            .daa
            .parse()
            .map_err(|_| CliError::config(field("daa"), format!("unknown algorithm `{}`", s.daa)))?;
        let mut daa = DaaConfig::new(algorithm, s.target_block_time);
        if let Some(w) = s.window {
            daa.window = w;
        }
        if let Some(a) = s.adjust {
            daa.adjust = a;
        }
        if let Some(r) = s.min_ratio {
            daa.min_ratio = r;
        }
        if let Some(r) = s.max_ratio {
            daa.max_ratio = r;
        }
        if let Some(d) = s.min_difficulty {
            let d = Difficulty::new(d).map_err(|e| CliError::config(field("min_difficulty"), e.to_string()))?;
            daa.pow_limit =
                Target::from_difficulty(d).map_err(|e| CliError::config(field("min_difficulty"), e.to_string()))?;
        }
        if let Some(v) = s.digishield_damping {
            daa.digishield.damping = v;
        }
        if let Some(v) = s.digishield_max_adjust_up {
            daa.digishield.max_adjust_up_pct = v;
        }
        if let Some(v) = s.digishield_max_adjust_down {
            daa.digishield.max_adjust_down_pct = v;
        }
        let genesis = Difficulty::new(s.genesis_difficulty)
            .map_err(|e| CliError::config(field("genesis_difficulty"), e.to_string()))?;
        if !(s.target_block_time.is_finite() && s.target_block_time > 0.0) {
            return Err(CliError::config(field("target_block_time"), "must be positive"));
        }
        let worker = HashRate::for_block_time(genesis, s.target_block_time)
            .map_err(|e| CliError::config(field("target_block_time"), e.to_string()))?;

        let miners = s
            .miners
            .iter()
            .enumerate()
            .map(|(i, m)| miner_spec(m, genesis, worker, &format!("{}.miners[{i}]", self.name)))
            .collect::<Result<Vec<_>, _>>()?;

        let config = SimConfig {
            daa,
            miners,
            num_blocks: num_blocks.unwrap_or(s.num_blocks),
            seed: seed.unwrap_or(s.seed),
            genesis_difficulty: genesis,
        };
        config.validate().map_err(|e| match e {
            jumpsim::Error::Config { field: f, reason } => CliError::config(field(&f), reason),
            other => CliError::config(self.name.clone(), other.to_string()),
        })?;
        Ok(config)
    }
}

fn miner_spec(m: &MinerEntry, genesis: Difficulty, worker: HashRate, path: &str) -> Result<MinerSpec, CliError> {
    let field = |name: &str| format!("{path}.{name}");
    let hashrate =
        HashRate::new(m.hashrate * worker.get()).map_err(|e| CliError::config(field("hashrate"), e.to_string()))?;
    let required =
        |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::config(field(name), "is required for this strategy"));
    let strategy = match m.strategy.as_str() {
        "always_on" => Strategy::AlwaysOn,
        "threshold_jumper" => Strategy::ThresholdJumper {
            attack_in: required(m.attack_in, "attack_in")?,
            attack_out: required(m.attack_out, "attack_out")?,
            base_difficulty: match m.base_difficulty {
                Some(d) => Difficulty::new(d).map_err(|e| CliError::config(field("base_difficulty"), e.to_string()))?,
                None => genesis,
            },
        },
        "epoch_jumper" => Strategy::EpochJumper {
            period: m
                .period
                .ok_or_else(|| CliError::config(field("period"), "is required for this strategy"))?,
        },
        other => {
            return Err(CliError::config(
                field("strategy"),
                format!("unknown strategy `{other}`"),
            ))
        }
    };
    Ok(MinerSpec::new(m.name.clone(), hashrate, strategy))
}

/// Contents of a scenario or manifest file.
#[derive(Debug, Clone, Default)]
pub struct ScenarioFile {
    pub seeds: Option<Vec<u64>>,
    pub include: Vec<PathBuf>,
    pub num_blocks: Option<u64>,
    pub scenarios: Vec<Scenario>,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_scenario_file(text: &str, origin: &Path) -> Result<ScenarioFile, CliError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::config(origin.display().to_string(), e.to_string()))?;
    let mut file = ScenarioFile::default();
    let mut scenarios = BTreeMap::new();
    let base = origin.parent().unwrap_or(Path::new(""));
    for (key, value) in table {
        match (key.as_str(), value) {
            ("seeds", v) => {
                let seeds: Vec<u64> = v
                    .try_into()
                    .map_err(|e: toml::de::Error| CliError::config("seeds", e.to_string()))?;
                file.seeds = Some(seeds);
            }
            ("include", v) => {
                let paths: Vec<String> = v
                    .try_into()
                    .map_err(|e: toml::de::Error| CliError::config("include", e.to_string()))?;
                file.include = paths.into_iter().map(|p| base.join(p)).collect();
            }
            ("num_blocks", v) => {
                let n: u64 = v
                    .try_into()
                    .map_err(|e: toml::de::Error| CliError::config("num_blocks", e.to_string()))?;
                file.num_blocks = Some(n);
            }
            (_, toml::Value::Table(t)) => {
                let spec: ScenarioSpec = toml::Value::Table(t)
                    .try_into()
                    .map_err(|e: toml::de::Error| CliError::config(key.clone(), e.message().to_string()))?;
                scenarios.insert(key.clone(), spec);
            }
            (_, _) => return Err(CliError::config(key, "unknown top-level key")),
        }
    }
    file.scenarios = scenarios
        .into_iter()
        .map(|(name, spec)| Scenario { name, spec })
        .collect();
    Ok(file)
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioFile, CliError> {
    parse_scenario_file(&read_file(path)?, path)
}

/// The scenario to simulate: the one named, or the only one in the file.
pub fn select_scenario(file: ScenarioFile, name: Option<&str>) -> Result<Scenario, CliError> {
    match name {
        Some(n) => file
            .scenarios
            .into_iter()
            .find(|s| s.name == n)
            .ok_or_else(|| CliError::config("scenario", format!("no scenario named `{n}`"))),
        None => {
            let count = file.scenarios.len();
            let mut it = file.scenarios.into_iter();
            match (it.next(), count) {
                (Some(s), 1) => Ok(s),
                (None, _) => Err(CliError::config("scenario", "the file defines no scenario")),
                _ => Err(CliError::config(
                    "scenario",
                    format!("the file defines {count} scenarios; pick one with --scenario"),
                )),
            }
        }
    }
}
