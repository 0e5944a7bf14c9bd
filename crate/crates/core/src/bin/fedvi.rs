use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedvi_core::bench_harness::{
    fit_rate, read_csv_file, run_experiment_with, verify, write_csv, ExperimentConfig, RunOptions,
};
use fedvi_core::Error;

#[derive(Parser)]
#[command(name = "fedvi", version, about = "Federated VI simulation and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every sweep point and seed of a config and emit CSV rows.
    Run {
        config: PathBuf,
        /// CSV destination; overrides the config's `output`. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Fit log-log gap slopes from a results CSV.
    Fit {
        csv: PathBuf,
        /// Column to regress against (R, K, M, MKR, sigma, round, ...).
        #[arg(long, default_value = "R")]
        x: String,
        /// Comma-separated grouping columns.
        #[arg(long, value_delimiter = ',', default_value = "algo")]
        group: Vec<String>,
    },
    /// Run the property and invariant suite for a config's problem.
    Verify { config: PathBuf },
}

enum Failure {
    Rejected(Error),
    Invariant,
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_rejection() {
            Failure::Rejected(e)
        } else {
            Failure::Other(e)
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            seed_override,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if out.is_some() {
                cfg.output = out;
            }
            let to_stdout = cfg.output.is_none();
            let result = run_experiment_with(&cfg, &RunOptions { workers, seed_override })?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            if to_stdout {
                write_csv(&result.rows, std::io::stdout().lock())?;
            } else {
                eprintln!("wrote {} rows", result.rows.len());
            }
        }
        Command::Fit { csv, x, group } => {
            let rows = read_csv_file(&csv)?;
            let group: Vec<&str> = group.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
            let mut stdout = std::io::stdout().lock();
            for fit in fit_rate(&rows, &group, &x)? {
                for w in &fit.warnings {
                    eprintln!("warning: {w}");
                }
                let line = serde_json::to_string(&fit).map_err(Error::from)?;
                writeln!(stdout, "{line}")?;
            }
        }
        Command::Verify { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = verify(&cfg)?;
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if !report.passed() {
                return Err(Failure::Invariant);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(e)) => {
            eprintln!("config rejected: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant) => {
            eprintln!("invariant suite failed");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
