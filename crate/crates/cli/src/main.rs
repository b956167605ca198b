mod analyze;
mod config;
mod kernel_table;
mod simulate;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigError;

/// Vortex-blob dynamics on the cylinder and checks of the confinement recursion.
#[derive(Debug, Parser)]
#[command(name = "cylvort", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation from a key-value config file and write the diagnostics CSV.
    Simulate(simulate::SimulateArgs),
    /// Certify the b-sequence bound and tabulate hitting times; exits 0 iff it passes.
    VerifyRecursion(verify::VerifyArgs),
    /// Fit the growth exponent and summarize drifts and tail constants of a diagnostics CSV.
    Analyze(analyze::AnalyzeArgs),
    /// Tabulate k1, k2 and the stream kernel on a grid.
    KernelTable(kernel_table::TableArgs),
    /// List the config keys.
    ConfigKeys(NoArgs),
}

#[derive(Debug, Args)]
struct NoArgs {}

/// Bad input from the command line; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Writes `text` to `path`, or to stdout without one.
pub fn emit(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    use anyhow::Context;
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::VerifyRecursion(a) => verify::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::KernelTable(a) => kernel_table::run(a),
        Command::ConfigKeys(_) => {
            for (k, doc) in config::KEYS {
                println!("{k:<18} {doc}");
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
