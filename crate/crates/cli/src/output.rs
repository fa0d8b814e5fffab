//! Output files of `simulate`.
//!
//! `series.csv` columns: `height,difficulty,solve_time,total_hashrate,attacker_active,winner`.
//! Difficulty is in `LZ` units, solve time in seconds, hashrate in worker
//! units, `attacker_active` is 0 or 1 and `winner` is the miner's name.
//!
//! `plot/difficulty.dat`, `plot/hashrate.dat` and `plot/attack.dat` hold
//! two whitespace-separated columns: height and value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use jumpsim::{ChainState, RunSummary, SimConfig};
use serde::Serialize;

use crate::error::CliError;

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn series_csv(chain: &ChainState, config: &SimConfig) -> String {
    let worker = config.worker_hashrate().get();
    let mut s = String::from("height,difficulty,solve_time,total_hashrate,attacker_active,winner\n");
    for r in &chain.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.height,
            r.difficulty.get(),
            r.solve_time.seconds(),
            r.total_hashrate.get() / worker,
            u8::from(r.attacker_active),
            config.miners[r.winner.0 as usize].name
        );
    }
    s
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    scenario: &'a str,
    seed: u64,
    daa: &'a str,
    target_block_time_s: f64,
    #[serde(flatten)]
    summary: &'a RunSummary,
}

pub fn summary_json(scenario: &str, config: &SimConfig, summary: &RunSummary) -> String {
    let file = SummaryFile {
        scenario,
        seed: config.seed,
        daa: config.daa.algorithm.name(),
        target_block_time_s: config.daa.target_block_time,
        summary,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("summary serialises");
    s.push('\n');
    s
}

/// The three plot curves, by file stem.
pub fn plot_data(chain: &ChainState, config: &SimConfig) -> [(&'static str, String); 3] {
    let worker = config.worker_hashrate().get();
    let mut difficulty = String::from("# height difficulty\n");
    let mut hashrate = String::from("# height total_hashrate\n");
    let mut attack = String::from("# height attacker_active\n");
    for r in &chain.records {
        let _ = writeln!(difficulty, "{} {}", r.height, r.difficulty.get());
        let _ = writeln!(hashrate, "{} {}", r.height, r.total_hashrate.get() / worker);
        let _ = writeln!(attack, "{} {}", r.height, u8::from(r.attacker_active));
    }
    [("difficulty", difficulty), ("hashrate", hashrate), ("attack", attack)]
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 300.0;
const SVG_MAX_POINTS: usize = 2000;

/// Difficulty against height with attack periods shaded.
pub fn svg_chart(chain: &ChainState, title: &str) -> String {
    let n = chain.len().max(1);
    let max_d = chain
        .records
        .iter()
        .map(|r| r.difficulty.get())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let x = |i: usize| i as f64 * SVG_WIDTH / n as f64;
    let y = |d: f64| SVG_HEIGHT - d / max_d * (SVG_HEIGHT - 10.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = SVG_WIDTH,
        h = SVG_HEIGHT + 20.0
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let mut i = 0;
    while i < chain.len() {
        if chain.records[i].attacker_active {
            let start = i;
            while i < chain.len() && chain.records[i].attacker_active {
                i += 1;
            }
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="0" width="{:.2}" height="{}" fill="#f4c7c3"/>"##,
                x(start),
                (x(i) - x(start)).max(0.5),
                SVG_HEIGHT
            );
        } else {
            i += 1;
        }
    }
    let step = chain.len().div_ceil(SVG_MAX_POINTS).max(1);
    let points: Vec<String> = chain
        .records
        .iter()
        .enumerate()
        .step_by(step)
        .map(|(i, r)| format!("{:.2},{:.2}", x(i), y(r.difficulty.get())))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f4e79" stroke-width="1" points="{}"/>"##,
        points.join(" ")
    );
    let _ = writeln!(
        s,
        r#"<text x="4" y="{}" font-size="12">difficulty (max {max_d:.4}), {n} blocks</text>"#,
        SVG_HEIGHT + 15.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
