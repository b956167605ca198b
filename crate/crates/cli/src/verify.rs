use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use cylvort::confinement::{
    compute_g_sequence, consistency_g_vs_b, sandwich_report, sweep_kur_bound, verify_kur_bound, BoundCertificate,
    ConfinementError, DominanceReport, EnvelopeConstants, RecursionParams, SandwichReport, DEFAULT_MAX_DEGREE,
};
use serde::Serialize;

use crate::{emit, usage};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2.0)]
    c1: f64,
    /// Must be at least 2
    #[arg(long, default_value_t = 2.0)]
    c2: f64,
    #[arg(long, default_value_t = 1.0)]
    c6: f64,
    /// Largest n certified; defaults to n0 + 7
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long, default_value_t = 14)]
    j_max: u32,
    /// Levels of the exact g-sequence used for hitting times and the a/b table
    #[arg(long, default_value_t = 8)]
    levels: u32,
    /// Largest j in the a/b dominance table
    #[arg(long, default_value_t = 4)]
    dominance_j: u32,
    /// Certify this many seeded random parameter draws instead of one parameter set
    #[arg(long)]
    sweep: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// In sweep mode each draw is certified for n in n0 ..= n0 + n_span
    #[arg(long, default_value_t = 7)]
    n_span: u32,
    /// JSON output; stdout without it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct HittingTimes {
    levels: u32,
    t: Vec<f64>,
    sandwich: SandwichReport,
}

#[derive(Debug, Serialize)]
struct Report {
    params: RecursionParams,
    certificate: BoundCertificate,
    hitting_times: HittingTimes,
    dominance: Vec<DominanceReport>,
    dominance_pass: bool,
    envelope_constants: EnvelopeConstants,
    pass: bool,
}

fn param_error(e: ConfinementError) -> anyhow::Error {
    match e {
        ConfinementError::Parameter(_) | ConfinementError::BelowN0 { .. } | ConfinementError::Resolution { .. } => {
            usage(e.to_string())
        }
        other => other.into(),
    }
}

pub fn run(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    if !(a.c2 >= 2.0) {
        return Err(usage(format!(
            "c2 = {} is not allowed: the recursion assumes c2 >= 2",
            a.c2
        )));
    }
    if let Some(draws) = a.sweep {
        let rep = sweep_kur_bound(a.seed, draws, a.n_span, a.j_max).map_err(param_error)?;
        emit(a.out.as_ref(), &(serde_json::to_string_pretty(&rep)? + "\n"))?;
        eprintln!(
            "sweep of {} draws: worst ratio {}, {} failures",
            rep.draws,
            rep.worst_ratio,
            rep.failures.len()
        );
        return Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }

    let params = RecursionParams::new(a.c1, a.c2, a.c6).map_err(param_error)?;
    let n_max = a.n_max.unwrap_or(params.n0 + 7);
    let certificate = verify_kur_bound(&params, params.n0..=n_max, 0..=a.j_max).map_err(param_error)?;
    let gs = compute_g_sequence(&params, a.levels, DEFAULT_MAX_DEGREE).map_err(param_error)?;
    let sandwich = sandwich_report(&gs);
    let mut dominance = Vec::new();
    for n in 1..=a.levels {
        if n + a.dominance_j > a.levels {
            break;
        }
        dominance.push(consistency_g_vs_b(&gs, n, a.dominance_j).map_err(param_error)?);
    }
    let dominance_pass = dominance.iter().all(|d| d.pass);
    let envelope_constants = EnvelopeConstants::new(&params, sandwich.c5);
    let pass = certificate.pass;
    let report = Report {
        params,
        hitting_times: HittingTimes {
            levels: a.levels,
            t: gs.hitting_times.clone(),
            sandwich,
        },
        certificate,
        dominance,
        dominance_pass,
        envelope_constants,
        pass,
    };
    emit(a.out.as_ref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    eprintln!(
        "certificate {} (max ratio {}); c3 = {}, c4 = {}, n0 = {}",
        if pass { "passes" } else { "fails" },
        report.certificate.max_ratio,
        params.c3,
        params.c4,
        params.n0
    );
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
