use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use jumpsim::chaindata::{self, DetectorParams, HeaderFormat};
use jumpsim::{run, summarize, RunSummary, SimConfig};

use crate::config::{load_scenario_file, select_scenario, Scenario};
use crate::error::CliError;
use crate::output::{create_dir, plot_data, series_csv, summary_json, svg_chart, write_file};

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub num_blocks: Option<u64>,
    pub emit_headers: bool,
    pub svg: bool,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let file = load_scenario_file(&args.config)?;
    let scenario = select_scenario(file, args.scenario.as_deref())?;
    let config = scenario.sim_config(args.seed, args.num_blocks)?;
    let chain = run(&config).map_err(|e| CliError::run(&scenario.name, e))?;
    let summary =
        summarize(&chain, &config.miners, config.worker_hashrate()).map_err(|e| CliError::run(&scenario.name, e))?;

    let out = &args.out;
    create_dir(&out.join("plot"))?;
    write_file(&out.join("series.csv"), series_csv(&chain, &config))?;
    write_file(
        &out.join("summary.json"),
        summary_json(&scenario.name, &config, &summary),
    )?;
    for (stem, data) in plot_data(&chain, &config) {
        write_file(&out.join("plot").join(format!("{stem}.dat")), data)?;
    }
    if args.svg {
        write_file(&out.join("chart.svg"), svg_chart(&chain, &scenario.name))?;
    }
    if args.emit_headers {
        let rows = chaindata::headers_from_chain(&chain, config.genesis_difficulty);
        let mut buf = Vec::new();
        chaindata::write_headers(&rows, HeaderFormat::Csv, &mut buf).map_err(|e| CliError::run(&scenario.name, e))?;
        write_file(&out.join("headers.csv"), buf)?;
    }
    Ok(report(&scenario.name, &summary))
}

fn report(name: &str, summary: &RunSummary) -> String {
    let mut s = format!(
        "{name}: {} blocks, mean solve time {:.1} s\n",
        summary.num_blocks, summary.mean_solve_time_s
    );
    for c in &summary.classes {
        let avg = c.avg_block_time_s.map_or("-".to_string(), |a| format!("{a:.1}"));
        s.push_str(&format!(
            "  {:<10} blocks {:>7}  avg block time {:>8}  efficiency {:.6}\n",
            c.name, c.blocks_won, avg, c.efficiency
        ));
    }
    s
}

#[derive(Debug, Clone, Default)]
pub struct SweepArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

/// One (scenario, seed) pair of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub scenario: String,
    pub config: SimConfig,
}

impl SweepRun {
    pub fn label(&self) -> String {
        format!("{}/seed_{}", self.scenario, self.config.seed)
    }
}

/// Expands a manifest into its runs, in scenario then seed order.
pub fn load_manifest(path: &Path) -> Result<Vec<SweepRun>, CliError> {
    let manifest = load_scenario_file(path)?;
    let seeds = manifest
        .seeds
        .clone()
        .ok_or_else(|| CliError::config("seeds", "is required"))?;
    if seeds.is_empty() {
        return Err(CliError::config("seeds", "must not be empty"));
    }
    let mut scenarios: Vec<Scenario> = Vec::new();
    for include in &manifest.include {
        scenarios.extend(load_scenario_file(include)?.scenarios);
    }
    scenarios.extend(manifest.scenarios);
    if scenarios.is_empty() {
        return Err(CliError::config("include", "the sweep lists no scenario"));
    }
    let mut names = HashSet::new();
    for s in &scenarios {
        if !names.insert(s.name.clone()) {
            return Err(CliError::config(s.name.clone(), "duplicate scenario name"));
        }
    }
    let mut unique_seeds = HashSet::new();
    if let Some(dup) = seeds.iter().find(|s| !unique_seeds.insert(**s)) {
        return Err(CliError::config("seeds", format!("seed {dup} is listed twice")));
    }

    let mut runs = Vec::with_capacity(scenarios.len() * seeds.len());
    for s in &scenarios {
        for &seed in &seeds {
            runs.push(SweepRun {
                scenario: s.name.clone(),
                config: s.sim_config(Some(seed), manifest.num_blocks)?,
            });
        }
    }
    Ok(runs)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    if args.jobs == Some(0) {
        return Err(CliError::config("jobs", "must be at least 1"));
    }
    let runs = load_manifest(&args.config)?;
    let summaries = execute(&runs, args.jobs)?;

    for (r, summary) in runs.iter().zip(&summaries) {
        let dir = args.out.join(&r.scenario).join(format!("seed_{}", r.config.seed));
        create_dir(&dir)?;
        write_file(&dir.join("summary.json"), summary_json(&r.scenario, &r.config, summary))?;
    }
    write_file(&args.out.join("comparison.csv"), comparison_csv(&runs, &summaries))?;
    let rollup = rollup_csv(&runs, &summaries);
    write_file(&args.out.join("rollup.csv"), &rollup)?;
    Ok(format!("{} runs\n{rollup}", runs.len()))
}

fn execute_one(r: &SweepRun) -> Result<RunSummary, CliError> {
    run(&r.config)
        .and_then(|chain| summarize(&chain, &r.config.miners, r.config.worker_hashrate()))
        .map_err(|e| CliError::run(r.label(), e))
}

#[cfg(feature = "parallel")]
fn execute(runs: &[SweepRun], jobs: Option<usize>) -> Result<Vec<RunSummary>, CliError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config("jobs", e.to_string()))?;
    pool.install(|| runs.par_iter().map(execute_one).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute(runs: &[SweepRun], _jobs: Option<usize>) -> Result<Vec<RunSummary>, CliError> {
    runs.iter().map(execute_one).collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

/// `scenario,seed,class,avg_block_time,efficiency`; an empty
/// `avg_block_time` means the class won no block.
pub fn comparison_csv(runs: &[SweepRun], summaries: &[RunSummary]) -> String {
    let mut s = String::from("scenario,seed,class,avg_block_time,efficiency\n");
    for (r, summary) in runs.iter().zip(summaries) {
        for c in &summary.classes {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.scenario,
                r.config.seed,
                c.name,
                fmt_opt(c.avg_block_time_s),
                c.efficiency
            ));
        }
    }
    s
}

/// Mean and sample standard deviation per scenario and class:
/// `scenario,class,runs,avg_block_time_mean,avg_block_time_std,efficiency_mean,efficiency_std`.
/// Block time statistics skip runs in which the class won nothing.
pub fn rollup_csv(runs: &[SweepRun], summaries: &[RunSummary]) -> String {
    struct Group<'a> {
        scenario: &'a str,
        class: &'a str,
        times: Vec<f64>,
        effs: Vec<f64>,
    }
    let mut groups: Vec<Group> = Vec::new();
    for (r, summary) in runs.iter().zip(summaries) {
        for c in &summary.classes {
            let i = match groups
                .iter()
                .position(|g| g.scenario == r.scenario && g.class == c.name)
            {
                Some(i) => i,
                None => {
                    groups.push(Group {
                        scenario: &r.scenario,
                        class: &c.name,
                        times: Vec::new(),
                        effs: Vec::new(),
                    });
                    groups.len() - 1
                }
            };
            groups[i].times.extend(c.avg_block_time_s);
            groups[i].effs.push(c.efficiency);
        }
    }
    let mut s =
        String::from("scenario,class,runs,avg_block_time_mean,avg_block_time_std,efficiency_mean,efficiency_std\n");
    for g in &groups {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            g.scenario,
            g.class,
            g.effs.len(),
            fmt_opt(mean(&g.times)),
            fmt_opt(std_dev(&g.times)),
            fmt_opt(mean(&g.effs)),
            fmt_opt(std_dev(&g.effs))
        ));
    }
    s
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn std_dev(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    Some(var.sqrt())
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub data: PathBuf,
    pub format: HeaderFormat,
    pub out: PathBuf,
    pub detector: DetectorParams,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<String, CliError> {
    args.detector.validate().map_err(input_error)?;
    let file = File::open(&args.data).map_err(|e| CliError::io(format!("cannot read {}: {e}", args.data.display())))?;
    let rows = chaindata::parse_headers(BufReader::new(file), args.format).map_err(input_error)?;
    let times = chaindata::solve_times(&rows).map_err(input_error)?;
    let regions = chaindata::detect_attack_regions(&rows, &args.detector).map_err(input_error)?;

    create_dir(&args.out)?;
    let mut st = String::from("height,solve_time,negative\n");
    for p in &times {
        st.push_str(&format!("{},{},{}\n", p.height, p.solve_time_s, u8::from(p.negative)));
    }
    write_file(&args.out.join("solve_times.csv"), st)?;
    let mut buf = Vec::new();
    chaindata::write_regions_csv(&regions, &mut buf).map_err(|e| CliError::io(e.to_string()))?;
    write_file(&args.out.join("regions.csv"), buf)?;
    Ok(format!("{} attack regions\n", regions.len()))
}

fn input_error(e: jumpsim::Error) -> CliError {
    match e {
        jumpsim::Error::Config { field, reason } => CliError::Config { field, reason },
        other => CliError::Parse(other.to_string()),
    }
}
