use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use cylvort::geometry::{regularized_kernel, stream_kernel, Displacement, KernelError};
use cylvort::io::format_float;

use crate::{emit, usage};

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    dx_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    dx_max: f64,
    #[arg(long, default_value_t = 11)]
    dx_count: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dy_min: f64,
    #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
    dy_max: f64,
    #[arg(long, default_value_t = 5)]
    dy_count: usize,
    /// Core radius; 0 gives the singular kernel
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// CSV output; stdout without it
    #[arg(long)]
    out: Option<PathBuf>,
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

// Adding +0.0 turns -0.0 into 0.0 so text diffs do not trip over the sign of zero.
fn cell(v: f64) -> String {
    format_float(v + 0.0)
}

pub fn run(a: TableArgs) -> anyhow::Result<ExitCode> {
    if a.dx_count == 0 || a.dy_count == 0 {
        return Err(usage("grid counts must be at least 1"));
    }
    if ![a.dx_min, a.dx_max, a.dy_min, a.dy_max].iter().all(|v| v.is_finite()) {
        return Err(usage("grid bounds must be finite"));
    }
    let mut text = String::from("dx,dy,k1,k2,gamma\n");
    for &dx in &grid(a.dx_min, a.dx_max, a.dx_count) {
        for &dy in &grid(a.dy_min, a.dy_max, a.dy_count) {
            let d = Displacement::new(dx, dy);
            let row = regularized_kernel(d, a.delta).and_then(|k| Ok((k, stream_kernel(d, a.delta)?)));
            let (k, g) = match row {
                Ok(v) => v,
                Err(e @ (KernelError::Singular { .. } | KernelError::NegativeDelta(_) | KernelError::NonFinite(_))) => {
                    return Err(usage(format!("grid point ({dx}, {dy}): {e}")))
                }
            };
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                cell(dx),
                cell(dy),
                cell(k.u1),
                cell(k.u2),
                cell(g)
            ));
        }
    }
    emit(a.out.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}
