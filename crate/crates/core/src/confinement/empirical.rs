//! Simulation output held against the tail inequality, the growth law and the envelope.

use serde::Serialize;

use super::envelope::{envelope_r, EnvelopeParams};
use super::ConfinementError;
use crate::field::{tail_threshold, DiagnosticsRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailInequalityRow {
    pub t: f64,
    /// `f(2a)`
    pub lhs: f64,
    /// `int_0^t f(a/2)^2 + e^{-a/4} f(a/2)`
    pub rhs: f64,
    /// `lhs / (a^{-2} rhs)`; absent while `rhs = 0`.
    pub c_emp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailInequalityReport {
    pub a: f64,
    pub rows: Vec<TailInequalityRow>,
    pub max_c_emp: Option<f64>,
    pub rhs_non_decreasing: bool,
}

fn exponent_column(exponents: &[u32], threshold: f64) -> Result<usize, ConfinementError> {
    exponents
        .iter()
        .position(|&n| tail_threshold(n) == threshold)
        .ok_or(ConfinementError::MissingThreshold { threshold })
}

/// Tracks `int_{|x|>2a} theta <~ a^{-2} int_0^t (f(a/2)^2 + e^{-a/4} f(a/2))` with
/// `a = 2 4^k`, so that both `a/2` and `2a` are recorded dyadic thresholds.
/// The `f_0` column is the total mass.
pub fn empirical_tail_inequality(
    records: &[DiagnosticsRecord],
    exponents: &[u32],
    a: f64,
) -> Result<TailInequalityReport, ConfinementError> {
    if !(a >= 2.0 && a.is_finite()) {
        return Err(ConfinementError::Parameter(format!("a must be at least 2, got {a}")));
    }
    if records.is_empty() {
        return Err(ConfinementError::InsufficientData("no records".into()));
    }
    let inner = exponent_column(exponents, a / 2.0)?;
    let outer = exponent_column(exponents, 2.0 * a)?;
    let weight = (-a / 4.0).exp();
    let integrand = |r: &DiagnosticsRecord| {
        let f = r.tails[inner];
        f * f + weight * f
    };
    let mut rows = Vec::with_capacity(records.len());
    let mut rhs = 0.0;
    for (i, r) in records.iter().enumerate() {
        if r.tails.len() != exponents.len() {
            return Err(ConfinementError::InsufficientData(format!(
                "record at t = {} has {} tails, expected {}",
                r.t,
                r.tails.len(),
                exponents.len()
            )));
        }
        if i > 0 {
            let prev = &records[i - 1];
            rhs += 0.5 * (r.t - prev.t) * (integrand(prev) + integrand(r));
        }
        let lhs = r.tails[outer];
        rows.push(TailInequalityRow {
            t: r.t,
            lhs,
            rhs,
            c_emp: (rhs > 0.0).then(|| lhs * a * a / rhs),
        });
    }
    let max_c_emp = rows.iter().filter_map(|r| r.c_emp).reduce(f64::max);
    let rhs_non_decreasing = rows.windows(2).all(|w| w[1].rhs >= w[0].rhs);
    Ok(TailInequalityReport {
        a,
        rows,
        max_c_emp,
        rhs_non_decreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    /// `d ~ prefactor (1 + t)^p`
    pub p: f64,
    pub prefactor: f64,
    pub t_from: f64,
    pub t_to: f64,
    pub points: usize,
}

pub const MIN_FIT_RECORDS: usize = 10;
pub const MIN_FIT_DECADES: f64 = 1.5;

/// Least-squares slope of `log` of the running-max diameter against `log(1 + t)`
/// over the last decade `[t_max / 10, t_max]`.
pub fn fit_growth_exponent(records: &[DiagnosticsRecord]) -> Result<GrowthFit, ConfinementError> {
    let t_max = records.last().map_or(0.0, |r| r.t);
    fit_growth_exponent_between(records, t_max / 10.0, t_max)
}

/// As [`fit_growth_exponent`] on an explicit window; the envelope still starts at the first record.
pub fn fit_growth_exponent_between(
    records: &[DiagnosticsRecord],
    t_from: f64,
    t_to: f64,
) -> Result<GrowthFit, ConfinementError> {
    if records.len() < MIN_FIT_RECORDS {
        return Err(ConfinementError::InsufficientData(format!(
            "need at least {MIN_FIT_RECORDS} records, got {}",
            records.len()
        )));
    }
    let span = ((1.0 + records[records.len() - 1].t) / (1.0 + records[0].t)).log10();
    if !(span >= MIN_FIT_DECADES) {
        return Err(ConfinementError::InsufficientData(format!(
            "records span {span:.3} decades of 1 + t, need {MIN_FIT_DECADES}"
        )));
    }
    let mut envelope = f64::NEG_INFINITY;
    let mut pts = Vec::new();
    for r in records {
        envelope = envelope.max(r.diameter);
        if r.t >= t_from && r.t <= t_to {
            pts.push(((1.0 + r.t).ln(), envelope.ln()));
        }
    }
    if pts.len() < 2 || pts.iter().any(|p| !p.1.is_finite()) {
        return Err(ConfinementError::InsufficientData(
            "fit window holds fewer than two records with positive diameter".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(ConfinementError::InsufficientData("fit window has no spread in t".into()));
    }
    let p = sxy / sxx;
    Ok(GrowthFit {
        p,
        prefactor: (my - p * mx).exp(),
        t_from,
        t_to,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeComparison {
    pub l: f64,
    pub t_from: f64,
    /// `d(t) <= 2 R_L(t)` at every record with `t >= t_from`.
    pub holds: bool,
    pub first_violation: Option<f64>,
    /// `max d(t) / (2 R_L(t))`
    pub max_ratio: f64,
}

pub fn envelope_comparison(
    records: &[DiagnosticsRecord],
    env: &EnvelopeParams,
    t_from: f64,
) -> Result<EnvelopeComparison, ConfinementError> {
    let t_from = t_from.max(1.0);
    let mut first_violation = None;
    let mut max_ratio = 0.0f64;
    for r in records.iter().filter(|r| r.t >= t_from) {
        let bound = 2.0 * envelope_r(env, r.t)?;
        max_ratio = max_ratio.max(r.diameter / bound);
        if r.diameter > bound && first_violation.is_none() {
            first_violation = Some(r.t);
        }
    }
    Ok(EnvelopeComparison {
        l: env.l,
        t_from,
        holds: first_violation.is_none(),
        first_violation,
        max_ratio,
    })
}
