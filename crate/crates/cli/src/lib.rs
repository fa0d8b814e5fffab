//! Command-line front end of the `jumpsim` simulator.
//!
//! Exit codes: 0 success, 1 a simulation failed, 2 bad usage, config or
//! input data, 3 file I/O.

pub mod commands;
pub mod config;
mod error;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jumpsim::chaindata::{DetectorParams, HeaderFormat};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "jumpsim",
    version,
    about = "Proof-of-work mining simulator with coin-hopping attackers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its series, summary and plot data.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scenario to run when the file defines several.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        num_blocks: Option<u64>,
        /// Also write the chain as a header export, `headers.csv`.
        #[arg(long)]
        emit_headers: bool,
        /// Also write `chart.svg`.
        #[arg(long)]
        svg: bool,
    },
    /// Run every scenario of a manifest for every seed.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Runs executed at once; defaults to one per CPU.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Detect jump-in attacks in a header export.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        /// `csv` or `json_lines`.
        #[arg(long, default_value = "csv")]
        format: HeaderFormat,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DetectorParams::default().window)]
        window: usize,
        #[arg(long, default_value_t = DetectorParams::default().low_frac)]
        low_frac: f64,
        #[arg(long, default_value_t = DetectorParams::default().burst_frac)]
        burst_frac: f64,
        #[arg(long, default_value_t = DetectorParams::default().local_span)]
        local_span: usize,
    },
}

/// Runs a parsed command and returns what to print on success.
pub fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Simulate {
            config,
            out,
            scenario,
            seed,
            num_blocks,
            emit_headers,
            svg,
        } => commands::cmd_simulate(&commands::SimulateArgs {
            config,
            out,
            scenario,
            seed,
            num_blocks,
            emit_headers,
            svg,
        }),
        Command::Sweep { config, out, jobs } => commands::cmd_sweep(&commands::SweepArgs { config, out, jobs }),
        Command::Analyze {
            data,
            format,
            out,
            window,
            low_frac,
            burst_frac,
            local_span,
        } => commands::cmd_analyze(&commands::AnalyzeArgs {
            data,
            format,
            out,
            detector: DetectorParams {
                window,
                low_frac,
                burst_frac,
                local_span,
            },
        }),
    }
}

/// Parses `args` (program name first), runs the command and reports.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
