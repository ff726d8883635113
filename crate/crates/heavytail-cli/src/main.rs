//! `heavytail` — deviation-probability experiments for sums of heavy-tailed
//! integer random variables.
//!
//! Exit codes: 0 success, 1 configuration error, 2 row-level failures.

mod config;
mod run;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "heavytail", version, about)]
struct Cli {
    /// Path to the TOML experiment config, or '-' for stdin
    #[arg(long, global = true, default_value = "-")]
    config: String,

    /// Output directory for CSV/manifest artifacts
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Dotted-path config override, e.g. --set tolerances.delta=0.1
    #[arg(long = "set", global = true)]
    set: Vec<String>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Log level: error, warn, info, debug, trace
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the first grid point and print it as JSON
    Estimate,
    /// Run the full (n, N) grid and write CSV + manifest
    Sweep,
    /// Write the critical-scales table
    Scales,
    /// Check the structural weight assumptions on a grid
    Validate,
    /// Dump the exact convolution law
    Oracle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let level = match cli.log_level.parse() {
        Ok(l) => l,
        Err(_) => {
            eprintln!("invalid log level {:?}", cli.log_level);
            return ExitCode::from(1);
        }
    };
    env_logger::Builder::new().filter_level(level).init();

    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let text = match read_config(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    let cfg = match ExperimentConfig::from_toml(&text, &cli.set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };

    let outcome = match cli.cmd {
        Cmd::Estimate => run::run_estimate(&cfg),
        Cmd::Sweep => run::run_sweep(&cfg, &cli.out),
        Cmd::Scales => run::run_scales(&cfg, &cli.out),
        Cmd::Validate => run::run_validate(&cfg),
        Cmd::Oracle => run::run_oracle(&cfg, &cli.out),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} row(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_config(path: &str) -> anyhow::Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}
