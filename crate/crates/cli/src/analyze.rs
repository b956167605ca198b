use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Args;
use cylvort::confinement::{
    compute_g_sequence, empirical_tail_inequality, envelope_comparison, fit_growth_exponent, phi_of_l,
    sandwich_report, EnvelopeComparison, EnvelopeConstants, EnvelopeParams, GrowthFit, RecursionParams,
    DEFAULT_MAX_DEGREE,
};
use cylvort::field::{tail_threshold, DiagnosticsRecord};
use cylvort::io::{read_diagnostics_csv, IoError};
use serde::Serialize;

use crate::{emit, usage};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Diagnostics CSV written by `simulate`
    csv: PathBuf,
    /// Envelope parameter L (> 1/3); defaults to L0 of the recursion constants
    #[arg(long)]
    l: Option<f64>,
    /// First time of the envelope comparison; defaults to the start of the last decade
    #[arg(long)]
    envelope_from: Option<f64>,
    /// Recursion constants behind c4 and c5 of the envelope
    #[arg(long, default_value_t = 2.0)]
    c1: f64,
    #[arg(long, default_value_t = 2.0)]
    c2: f64,
    #[arg(long, default_value_t = 1.0)]
    c6: f64,
    /// JSON output; stdout without it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Drift {
    initial: f64,
    max_abs: f64,
    max_rel: f64,
}

#[derive(Debug, Serialize)]
struct Drifts {
    mass: Drift,
    h_center: Drift,
    energy: Drift,
    abs_moment: Drift,
}

#[derive(Debug, Serialize)]
struct TailSummary {
    a: f64,
    max_c_emp: Option<f64>,
    rhs_non_decreasing: bool,
    final_lhs: f64,
    final_rhs: f64,
}

#[derive(Debug, Serialize)]
struct EnvelopeSummary {
    l: f64,
    c4: f64,
    c5: f64,
    phi: f64,
    comparison: EnvelopeComparison,
}

#[derive(Debug, Serialize)]
struct Report {
    input: String,
    records: usize,
    t_end: f64,
    tail_exponents: Vec<u32>,
    growth_fit: Option<GrowthFit>,
    growth_fit_error: Option<String>,
    drift: Drifts,
    tail_inequality: Vec<TailSummary>,
    envelope: Option<EnvelopeSummary>,
    envelope_error: Option<String>,
}

fn drift(records: &[DiagnosticsRecord], f: fn(&DiagnosticsRecord) -> f64) -> Drift {
    let initial = f(&records[0]);
    let max_abs = records
        .iter()
        .map(|r| (f(r) - initial).abs())
        .fold(0.0, f64::max);
    Drift {
        initial,
        max_abs,
        max_rel: if initial != 0.0 { max_abs / initial.abs() } else { max_abs },
    }
}

pub fn run(a: AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let file = File::open(&a.csv).with_context(|| format!("opening {}", a.csv.display()))?;
    let table = match read_diagnostics_csv(BufReader::new(file)) {
        Ok(t) => t,
        Err(e @ (IoError::MissingColumns(_) | IoError::Malformed { .. })) => {
            return Err(usage(format!("{}: {e}", a.csv.display())))
        }
        Err(e) => return Err(e.into()),
    };
    let recs = &table.records;
    if recs.is_empty() {
        return Err(usage(format!("{}: no data rows", a.csv.display())));
    }
    let t_end = recs[recs.len() - 1].t;

    let (growth_fit, growth_fit_error) = match fit_growth_exponent(recs) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut tail_inequality = Vec::new();
    for &k in &table.tail_exponents {
        let a_val = 2.0 * tail_threshold(k);
        if let Ok(rep) = empirical_tail_inequality(recs, &table.tail_exponents, a_val) {
            let last = rep.rows.last().unwrap();
            tail_inequality.push(TailSummary {
                a: a_val,
                max_c_emp: rep.max_c_emp,
                rhs_non_decreasing: rep.rhs_non_decreasing,
                final_lhs: last.lhs,
                final_rhs: last.rhs,
            });
        }
    }

    let params = RecursionParams::new(a.c1, a.c2, a.c6).map_err(|e| usage(e.to_string()))?;
    let gs = compute_g_sequence(&params, 7, DEFAULT_MAX_DEGREE)?;
    let c5 = sandwich_report(&gs).c5;
    let l = a.l.unwrap_or_else(|| EnvelopeConstants::new(&params, c5).l0);
    let env = EnvelopeParams::new(c5, params.c4, l).map_err(|e| usage(e.to_string()))?;
    let from = a.envelope_from.unwrap_or(t_end / 10.0);
    let (envelope, envelope_error) = if t_end < 1.0 {
        (None, Some("run ends before t = 1, where the envelope starts".to_string()))
    } else {
        let comparison = envelope_comparison(recs, &env, from)?;
        (
            Some(EnvelopeSummary {
                l,
                c4: params.c4,
                c5,
                phi: phi_of_l(&env),
                comparison,
            }),
            None,
        )
    };

    let report = Report {
        input: a.csv.display().to_string(),
        records: recs.len(),
        t_end,
        tail_exponents: table.tail_exponents.clone(),
        growth_fit,
        growth_fit_error,
        drift: Drifts {
            mass: drift(recs, |r| r.mass),
            h_center: drift(recs, |r| r.h_center),
            energy: drift(recs, |r| r.energy),
            abs_moment: drift(recs, |r| r.abs_moment),
        },
        tail_inequality,
        envelope,
        envelope_error,
    };
    emit(a.out.as_ref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    match &report.growth_fit {
        Some(f) => eprintln!("growth exponent p = {:.4} over t in [{}, {}]", f.p, f.t_from, f.t_to),
        None => eprintln!("no growth fit: {}", report.growth_fit_error.as_deref().unwrap_or("")),
    }
    Ok(ExitCode::SUCCESS)
}
