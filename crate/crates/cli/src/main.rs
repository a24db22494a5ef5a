//! `catswap`: identity verification, protocol Monte Carlo, and collusion
//! analysis for qudit cat-state swapping.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! errors and oracle-size refusals.

mod collude;
mod protocol;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::RunReport;

#[derive(Parser)]
#[command(name = "catswap", version, about = "Qudit cat-state swapping and secret-sharing harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the swap identities against the dense oracle.
    Verify(verify::VerifyArgs),
    /// Run secret-sharing rounds and check key recovery.
    Protocol(protocol::ProtocolArgs),
    /// Compute what a coalition missing some parties learns about the key.
    Collude(collude::ColludeArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Clone)]
pub struct CommonArgs {
    /// Seed for all randomness; drawn from entropy and printed when absent.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Write the JSON report to PATH, or to standard output with `-`.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

impl CommonArgs {
    pub fn resolve_seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let seed = rand::random::<u64>();
            eprintln!("seed: {seed}");
            seed
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Symbolic,
    Statevector,
}

/// Usage problems and oracle-size refusals; both exit with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let started = Instant::now();

    let (result, json) = match &cli.command {
        Command::Verify(a) => (verify::run(a, args), a.common.json.clone()),
        Command::Protocol(a) => (protocol::run(a, args), a.common.json.clone()),
        Command::Collude(a) => (collude::run(a, args), a.common.json.clone()),
    };

    let mut report = match result {
        Ok(report) => report,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    report.duration = started.elapsed();
    emit(&report, json.as_deref())
}

fn emit(report: &RunReport, json: Option<&std::path::Path>) -> ExitCode {
    match json {
        Some(path) if path.as_os_str() == "-" => print!("{}", report.to_json()),
        Some(path) => {
            if let Err(e) = std::fs::write(path, report.to_json()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            print!("{}", report.to_table());
        }
        None => print!("{}", report.to_table()),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
