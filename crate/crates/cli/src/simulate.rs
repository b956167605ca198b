use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use cylvort::dynamics::simulate_with;
use cylvort::io::{write_snapshot, CsvWriter};
use cylvort::scenario::build_scenario;
use cylvort::VorticityEnsemble;
use serde::Serialize;

use crate::config::{self, ConfigError, RunConfig};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Key-value config file
    config: PathBuf,
    /// Diagnostics CSV
    #[arg(long, default_value = "diagnostics.csv")]
    csv: PathBuf,
    /// Run manifest; defaults to the CSV path with a .manifest.json extension
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Binary snapshot of the final (or last good) ensemble
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'static str,
    version: &'static str,
    parallel: bool,
    config_path: String,
    config: &'a [(String, String)],
    resolved: &'a RunConfig,
    blobs: usize,
    records: usize,
    t_reached: Option<f64>,
    wall_time_seconds: f64,
    status: &'static str,
    error: Option<String>,
    csv: String,
    snapshot: Option<String>,
}

pub fn run(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let cfg = config::load(&args.config)?;
    let ens = build_scenario(&cfg.scenario).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: e.to_string(),
    })?;
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| args.csv.with_extension("manifest.json"));

    let start = Instant::now();
    let file = File::create(&args.csv).with_context(|| format!("creating {}", args.csv.display()))?;
    let mut writer = CsvWriter::new(BufWriter::new(file), &cfg.sim.tail_exponents)?;
    let mut records = 0usize;
    let mut t_reached = None;
    let outcome = simulate_with(&ens, &cfg.sim, |r, _| {
        writer.write_record(r).map_err(|e| e.to_string())?;
        records += 1;
        t_reached = Some(r.t);
        Ok(())
    });
    drop(writer);
    let wall = start.elapsed().as_secs_f64();

    let (final_state, error): (VorticityEnsemble, Option<String>) = match outcome {
        Ok(s) => (s, None),
        Err((s, e)) => (s, Some(e.to_string())),
    };
    if let Some(p) = &args.snapshot {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_snapshot(BufWriter::new(f), &final_state)?;
    }
    let manifest = Manifest {
        command: "simulate",
        version: env!("CARGO_PKG_VERSION"),
        parallel: cfg!(feature = "parallel"),
        config_path: args.config.display().to_string(),
        config: &cfg.entries,
        resolved: &cfg,
        blobs: ens.len(),
        records,
        t_reached,
        wall_time_seconds: wall,
        status: if error.is_none() { "ok" } else { "aborted" },
        error: error.clone(),
        csv: args.csv.display().to_string(),
        snapshot: args.snapshot.as_ref().map(|p| p.display().to_string()),
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", manifest_path.display()))?;

    match error {
        None => {
            eprintln!("{} records for {} blobs in {wall:.2} s", records, ens.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(e) => {
            eprintln!("error: run aborted after {records} records: {e}");
            Ok(ExitCode::from(1))
        }
    }
}
