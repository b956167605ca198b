use std::f64::consts::LN_2;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::piecewise::{apply_mn, hitting_time, PiecewiseFn};
use super::{ConfinementError, RecursionParams};

const LN_4: f64 = 2.0 * LN_2;

/// `g_0 .. g_N` together with their hitting times `t_n` (`t_0 = 0`).
#[derive(Debug, Clone, Serialize)]
pub struct GSequence {
    pub params: RecursionParams,
    pub functions: Vec<PiecewiseFn>,
    pub hitting_times: Vec<f64>,
}

impl GSequence {
    pub fn levels(&self) -> u32 {
        (self.functions.len() - 1) as u32
    }

    /// `t_n`
    pub fn t(&self, n: u32) -> f64 {
        self.hitting_times[n as usize]
    }

    pub fn g(&self, n: u32) -> &PiecewiseFn {
        &self.functions[n as usize]
    }
}

/// `g_0 = c1`, `g_{n+1} = M_n g_n` for `n < levels`, each computed exactly.
pub fn compute_g_sequence(
    params: &RecursionParams,
    levels: u32,
    max_degree: usize,
) -> Result<GSequence, ConfinementError> {
    if levels < 1 {
        return Err(ConfinementError::Parameter("need at least one level".into()));
    }
    let mut functions = vec![PiecewiseFn::constant(params.c1)];
    let mut hitting_times = vec![0.0];
    for n in 0..levels {
        let next = apply_mn(&functions[n as usize], n, params, max_degree)?;
        hitting_times.push(hitting_time(&next, params.level(n + 1))?);
        functions.push(next);
    }
    Ok(GSequence {
        params: *params,
        functions,
        hitting_times,
    })
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln e^{-4^{n+j}/2}`
fn log_small_term(n: u32, j: u32) -> f64 {
    -0.5 * 4f64.powi((n + j) as i32)
}

/// `b_{n,0..=J}` by direct floating-point iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BSequence {
    pub n: u32,
    pub values: Vec<f64>,
    /// First `j` at which the iteration underflowed to zero.
    pub underflow_at: Option<u32>,
}

pub fn compute_b_sequence(params: &RecursionParams, n: u32, j_max: u32) -> BSequence {
    let (c2, c6) = (params.c2, params.c6);
    let mut values = vec![params.level(n)];
    let mut underflow_at = None;
    for j in 0..j_max {
        let b = values[j as usize];
        let small = (-0.5 * 4f64.powi((n + j) as i32)).exp();
        let grown = c2 * 4f64.powi(-2 * (n + j) as i32) * b * (b + small) * c6 * 4f64.powi(3 * n as i32);
        let next = grown.min(c2 * 4f64.powi(-((n + j + 1) as i32)));
        if next == 0.0 && underflow_at.is_none() {
            underflow_at = Some(j + 1);
        }
        values.push(next);
    }
    BSequence {
        n,
        values,
        underflow_at,
    }
}

/// `c_{n,0..=J}` by direct floating-point iteration.
pub fn compute_c_sequence(params: &RecursionParams, n: u32, j_max: u32) -> Vec<f64> {
    let (c2, c6) = (params.c2, params.c6);
    let mut values = vec![params.level(n)];
    for j in 0..j_max {
        let c = values[j as usize];
        let grown = 2.0 * c2 * 4f64.powi(-2 * (n + j) as i32) * c * c * c6 * 4f64.powi(3 * n as i32);
        values.push(grown.min(c2 * 4f64.powi(-((n + j + 1) as i32))));
    }
    values
}

/// `q_j = ln(b_{n,j} / (c2 4^{-n}))`, iterated in log space so nothing underflows.
/// `q_0 = 0` exactly.
pub fn b_normalized_log_sequence(params: &RecursionParams, n: u32, j_max: u32) -> Vec<f64> {
    let base = params.c2.ln() - n as f64 * LN_4;
    let growth = (params.c2 * params.c6).ln();
    let mut q = vec![0.0];
    for j in 0..j_max {
        let qj = q[j as usize];
        let grown = growth + (n as f64 - 2.0 * j as f64) * LN_4 + qj + log_add_exp(base + qj, log_small_term(n, j));
        q.push(grown.min(-((j + 1) as f64) * LN_4));
    }
    q
}

/// `ln(c_{n,j} / (c2 4^{-n}))`; the recursion is independent of `n` in this form.
pub fn c_normalized_log_sequence(params: &RecursionParams, j_max: u32) -> Vec<f64> {
    let growth = (2.0 * params.c2 * params.c6).ln() + params.c2.ln();
    let mut q = vec![0.0];
    for j in 0..j_max {
        let qj = q[j as usize];
        let grown = growth - 2.0 * j as f64 * LN_4 + 2.0 * qj;
        q.push(grown.min(-((j + 1) as f64) * LN_4));
    }
    q
}

/// `ln(x / (c3 4^{-n - c4 2^j}))` for `x = c2 4^{-n} e^q`, using `c3 = c2 4^{c4}`.
fn log_ratio(params: &RecursionParams, q: f64, j: u32) -> f64 {
    q + params.c4 * (2f64.powi(j as i32) - 1.0) * LN_4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub n: u32,
    pub j: u32,
    pub ratio: f64,
}

/// Evidence for `b_{n,j} <= c3 4^{-n - c4 2^j}` over a finite index range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub params: RecursionParams,
    pub n_range: (u32, u32),
    pub j_range: (u32, u32),
    /// `max b_{n,j} / (c3 4^{-n - c4 2^j})`
    pub max_ratio: f64,
    /// Largest ratios, worst first.
    pub witnesses: Vec<Witness>,
    /// `b_{n,j} >= e^{-4^{n+j}/2}` held at every index.
    pub lower_bound_holds: bool,
    /// `c_{n,j} >= b_{n,j}` held at every index.
    pub c_dominates_b: bool,
    /// `max c_{n,j} / (c3 4^{-n - c4 2^j})`
    pub c_max_ratio: f64,
    /// Indices where the plain floating-point `b` underflows to zero.
    pub direct_underflow: Vec<Witness>,
    pub pass: bool,
}

const WITNESS_COUNT: usize = 5;

pub fn verify_kur_bound(
    params: &RecursionParams,
    n_range: RangeInclusive<u32>,
    j_range: RangeInclusive<u32>,
) -> Result<BoundCertificate, ConfinementError> {
    let (n_lo, n_hi) = (*n_range.start(), *n_range.end());
    let (j_lo, j_hi) = (*j_range.start(), *j_range.end());
    if n_lo < params.n0 {
        return Err(ConfinementError::BelowN0 { n: n_lo, n0: params.n0 });
    }
    if n_lo > n_hi || j_lo > j_hi {
        return Err(ConfinementError::Parameter("empty index range".into()));
    }
    let c_q = c_normalized_log_sequence(params, j_hi);
    let mut all = Vec::new();
    let mut lower_bound_holds = true;
    let mut c_dominates_b = true;
    let mut c_max_log = f64::NEG_INFINITY;
    let mut direct_underflow = Vec::new();
    for n in n_lo..=n_hi {
        let q = b_normalized_log_sequence(params, n, j_hi);
        let base = params.c2.ln() - n as f64 * LN_4;
        if let Some(j) = compute_b_sequence(params, n, j_hi).underflow_at {
            if j >= j_lo {
                direct_underflow.push(Witness { n, j, ratio: 0.0 });
            }
        }
        for j in j_lo..=j_hi {
            let qj = q[j as usize];
            all.push(Witness {
                n,
                j,
                ratio: log_ratio(params, qj, j),
            });
            lower_bound_holds &= base + qj >= log_small_term(n, j);
            c_dominates_b &= c_q[j as usize] >= qj;
            c_max_log = c_max_log.max(log_ratio(params, c_q[j as usize], j));
        }
    }
    all.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then((a.n, a.j).cmp(&(b.n, b.j))));
    let witnesses: Vec<Witness> = all
        .iter()
        .take(WITNESS_COUNT)
        .map(|w| Witness {
            ratio: w.ratio.exp(),
            ..*w
        })
        .collect();
    let max_ratio = witnesses[0].ratio;
    Ok(BoundCertificate {
        params: *params,
        n_range: (n_lo, n_hi),
        j_range: (j_lo, j_hi),
        max_ratio,
        witnesses,
        lower_bound_holds,
        c_dominates_b,
        c_max_ratio: c_max_log.exp(),
        direct_underflow,
        pass: max_ratio <= 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub draws: usize,
    pub failures: Vec<BoundCertificate>,
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Certificates for `draws` seeded parameter draws `c2 ~ U[2, 8]`, `c6 ~ U[0.1, 10]`,
/// each over `n in [n0, n0 + n_span]`, `j in [0, j_max]`.
pub fn sweep_kur_bound(seed: u64, draws: usize, n_span: u32, j_max: u32) -> Result<SweepReport, ConfinementError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    for _ in 0..draws {
        let c2 = rng.gen_range(2.0..8.0);
        let c6 = rng.gen_range(0.1..10.0);
        let params = RecursionParams::new(1.0, c2, c6)?;
        let cert = verify_kur_bound(&params, params.n0..=params.n0 + n_span, 0..=j_max)?;
        worst_ratio = worst_ratio.max(cert.max_ratio);
        if !cert.pass {
            failures.push(cert);
        }
    }
    Ok(SweepReport {
        seed,
        draws,
        pass: failures.is_empty(),
        failures,
        worst_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRow {
    pub j: u32,
    /// `a_{n,j} = g_{n+j}(t_n)`
    pub a: f64,
    pub b: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub n: u32,
    pub t_n: f64,
    pub rows: Vec<DominanceRow>,
    /// `a_{n,j} <= b_{n,j} (1 + 1e-9)` for every row.
    pub pass: bool,
    /// `a_{n,j}` non-increasing for `j >= 1` (observed, not asserted by the bound).
    pub a_monotone_after_first: bool,
}

pub const DOMINANCE_SLACK: f64 = 1e-9;

/// Compares `a_{n,j} = g_{n+j}(t_n)` from the exact g-sequence with `b_{n,j}`.
pub fn consistency_g_vs_b(gseq: &GSequence, n: u32, j_max: u32) -> Result<DominanceReport, ConfinementError> {
    if n < 1 {
        return Err(ConfinementError::Parameter("n must be at least 1".into()));
    }
    if n + j_max > gseq.levels() {
        return Err(ConfinementError::Resolution {
            level: n + j_max,
            degree: (1usize << (n + j_max).min(63)) - 1,
            max_degree: (1usize << gseq.levels()) - 1,
        });
    }
    let params = &gseq.params;
    let t_n = gseq.t(n);
    let b = compute_b_sequence(params, n, j_max);
    let rows: Vec<DominanceRow> = (0..=j_max)
        .map(|j| {
            let a = gseq.g(n + j).eval(t_n);
            let bj = b.values[j as usize];
            DominanceRow {
                j,
                a,
                b: bj,
                ratio: if bj > 0.0 { a / bj } else if a == 0.0 { 0.0 } else { f64::INFINITY },
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.a <= r.b * (1.0 + DOMINANCE_SLACK));
    let a_monotone_after_first = rows.windows(2).skip(1).all(|w| w[1].a <= w[0].a);
    Ok(DominanceReport {
        n,
        t_n,
        rows,
        pass,
        a_monotone_after_first,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub n: u32,
    pub t_n: f64,
    /// `t_n 4^{-3n}`
    pub scaled: f64,
    /// `4^{3(n-1)-1} / (2 c2^2)`, the lower bound for `t_n` (`n >= 2`)
    pub lower: Option<f64>,
    /// `t_{n-1} + 4^{3(n-1)-1} / c2^2`, the upper bound for `t_n` (`n >= 2`)
    pub upper: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    /// `1 / (4 c1 (c1 + e^{-1/2}))`
    pub t1_closed_form: f64,
    pub rows: Vec<SandwichRow>,
    /// `min_n t_n 4^{-3n}`
    pub c5: f64,
    /// `max_n t_n 4^{-3n}`
    pub c6_extracted: f64,
    pub all_hold: bool,
}

pub fn sandwich_report(gseq: &GSequence) -> SandwichReport {
    let p = &gseq.params;
    let mut rows = Vec::new();
    for n in 1..=gseq.levels() {
        let t_n = gseq.t(n);
        let (lower, upper) = if n >= 2 {
            let k = 3 * (n as i32 - 1) - 1;
            (
                Some(4f64.powi(k) / (2.0 * p.c2 * p.c2)),
                Some(gseq.t(n - 1) + 4f64.powi(k) / (p.c2 * p.c2)),
            )
        } else {
            (None, None)
        };
        let holds = lower.map_or(true, |l| t_n >= l) && upper.map_or(true, |u| t_n <= u);
        rows.push(SandwichRow {
            n,
            t_n,
            scaled: t_n * 4f64.powi(-3 * n as i32),
            lower,
            upper,
            holds,
        });
    }
    let c5 = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let c6_extracted = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    SandwichReport {
        t1_closed_form: 1.0 / (4.0 * p.c1 * (p.c1 + (-0.5f64).exp())),
        all_hold: rows.iter().all(|r| r.holds),
        rows,
        c5,
        c6_extracted,
    }
}
