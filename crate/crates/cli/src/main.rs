//! `plap`: run, sweep and audit nonlocal p-Laplacian evolutions.
//!
//! Exit status: 0 when every applicable check passes, 1 on an audit or
//! runtime failure, 2 on a configuration or usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "plap", version, about = "Nonlocal p-Laplacian evolution solver and estimate auditor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file and audit the result.
    Run { config: PathBuf },
    /// Run every configuration matching a glob pattern on a worker pool
    /// (size from PLAP_WORKERS, default: all cores).
    Sweep { pattern: String },
    /// Run a built-in verification suite: inequalities, oracle, invariants or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the two built-in figure experiments.
    Figures {
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { config } => commands::run(&config),
        Command::Sweep { pattern } => commands::sweep(&pattern),
        Command::Verify { suite, seed, out } => commands::verify(&suite, seed, out.as_deref()),
        Command::Figures { out } => commands::figures(&out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
