//! `sde run <config> [--seed S] [--threads N] [--out DIR]` and `sde validate <config>`.
//!
//! Exit codes: 0 success, 1 error, 2 a checked inequality was violated.
//! Seed and thread count come from the flag, else `SDE_SEED`/`SDE_THREADS`,
//! else the config file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdelab::experiment::{load_config, run_experiment};

#[derive(Parser)]
#[command(name = "sde", version, about = "Run declarative SDE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        config: PathBuf,
        #[arg(long, env = "SDE_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "SDE_THREADS")]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a configuration without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => {
                println!("{}: valid {} experiment", config.display(), cfg.kind);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::from(1)
            }
        },
        Command::Run {
            config,
            seed,
            threads,
            out,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if threads == Some(0) {
                eprintln!("--threads must be at least 1");
                return ExitCode::from(1);
            }
            if threads.is_some() {
                cfg.threads = threads;
            }
            if let Some(o) = out {
                cfg.output = o;
            }
            match run_experiment(&cfg) {
                Ok(summary) => {
                    println!(
                        "{} experiment: {:?}; report at {}",
                        cfg.kind,
                        summary.outcome,
                        summary.report.display()
                    );
                    ExitCode::from(summary.outcome.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
