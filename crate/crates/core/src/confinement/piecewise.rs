//! Exact piecewise-polynomial functions on `[0, inf)` and the capped
//! integral operator that generates the recursion functions `g_n`.
//!
//! Each piece is stored as a polynomial in the local variable
//! `u = (t - t_i) / (t_{i+1} - t_i)` on `[0, 1]`. For the functions produced
//! by [`apply_mn`] every coefficient is non-negative, so Horner evaluation has
//! no cancellation and the coefficients are bounded by the piece's end value.

use serde::Serialize;

use super::{ConfinementError, RecursionParams};

/// Default polynomial degree cap; enough for `g_0 .. g_12` (`deg g_n = 2^n - 1`).
pub const DEFAULT_MAX_DEGREE: usize = 4095;

const CONTINUITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseFn {
    /// `t_0 = 0 < t_1 < ... < t_m`; piece `i` lives on `[t_i, t_{i+1}]`.
    breakpoints: Vec<f64>,
    /// Local-variable coefficients, lowest degree first.
    pieces: Vec<Vec<f64>>,
    /// Value for `t >= t_m`.
    tail_constant: f64,
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

impl PiecewiseFn {
    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: vec![0.0],
            pieces: Vec::new(),
            tail_constant: c,
        }
    }

    /// Builds a function from explicit pieces. Breakpoints must start at 0 and
    /// increase strictly, with one more breakpoint than pieces.
    pub fn new(
        breakpoints: Vec<f64>,
        pieces: Vec<Vec<f64>>,
        tail_constant: f64,
    ) -> Result<Self, ConfinementError> {
        let bad = |m: String| Err(ConfinementError::Contract(m));
        if breakpoints.first() != Some(&0.0) {
            return bad("breakpoints must start at t = 0".into());
        }
        if breakpoints.len() != pieces.len() + 1 {
            return bad(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                pieces.len()
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|t| !t.is_finite()) {
            return bad("breakpoints must be finite and strictly increasing".into());
        }
        if pieces.iter().any(|p| p.is_empty() || p.iter().any(|c| !c.is_finite())) || !tail_constant.is_finite() {
            return bad("pieces need at least one finite coefficient".into());
        }
        Ok(Self {
            breakpoints,
            pieces,
            tail_constant,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    pub fn tail_constant(&self) -> f64 {
        self.tail_constant
    }

    pub fn last_breakpoint(&self) -> f64 {
        *self.breakpoints.last().expect("at least one breakpoint")
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(|p| p.len() - 1).max().unwrap_or(0)
    }

    fn piece_len(&self, i: usize) -> f64 {
        self.breakpoints[i + 1] - self.breakpoints[i]
    }

    fn piece_start(&self, i: usize) -> f64 {
        self.pieces[i][0]
    }

    fn piece_end(&self, i: usize) -> f64 {
        self.pieces[i].iter().sum()
    }

    /// Value at `t`; times before 0 evaluate at 0.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        if t >= self.last_breakpoint() {
            return self.tail_constant;
        }
        // last breakpoint <= t
        let i = self.breakpoints.partition_point(|&b| b <= t) - 1;
        let u = (t - self.breakpoints[i]) / self.piece_len(i);
        horner(&self.pieces[i], u)
    }

    /// Largest jump between adjacent pieces (and into the tail), relative to
    /// `max(1, tail)`.
    pub fn max_jump(&self) -> f64 {
        let scale = self.tail_constant.abs().max(1.0);
        let mut jump = 0.0f64;
        for i in 0..self.pieces.len() {
            let next = if i + 1 < self.pieces.len() {
                self.piece_start(i + 1)
            } else {
                self.tail_constant
            };
            jump = jump.max((self.piece_end(i) - next).abs() / scale);
        }
        jump
    }

    /// Checks non-negativity and monotonicity. Pieces with non-negative
    /// coefficients pass directly; others are sampled densely.
    pub fn check_nonneg_nondecreasing(&self) -> Result<(), ConfinementError> {
        let fail = |m: String| Err(ConfinementError::Contract(m));
        let tol = CONTINUITY_TOL * self.tail_constant.abs().max(1.0);
        for (i, p) in self.pieces.iter().enumerate() {
            if p[0] < -tol {
                return fail(format!("negative value {} at t = {}", p[0], self.breakpoints[i]));
            }
            if p.iter().any(|&c| c < 0.0) {
                let dp = derivative(p);
                const SAMPLES: usize = 256;
                for s in 0..=SAMPLES {
                    let u = s as f64 / SAMPLES as f64;
                    if horner(&dp, u) < -tol || horner(p, u) < -tol {
                        return fail(format!(
                            "not non-negative and non-decreasing on piece {i} near u = {u}"
                        ));
                    }
                }
            }
        }
        if self.pieces.is_empty() && self.tail_constant < 0.0 {
            return fail(format!("negative constant {}", self.tail_constant));
        }
        for i in 0..self.pieces.len() {
            let next = if i + 1 < self.pieces.len() {
                self.piece_start(i + 1)
            } else {
                self.tail_constant
            };
            if next < self.piece_end(i) - tol {
                return fail(format!("decreases across t = {}", self.breakpoints[i + 1]));
            }
        }
        Ok(())
    }
}

/// First `u` in `[0, 1]` where the increasing polynomial `f` reaches `target`.
/// Bisection keeps the bracket; one Newton step polishes the midpoint.
fn solve_increasing(f: &[f64], target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if horner(f, lo) >= target {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if horner(f, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let slope = horner(&derivative(f), mid);
    if slope > 0.0 {
        let polished = mid - (horner(f, mid) - target) / slope;
        if (lo..=hi).contains(&polished) {
            return polished;
        }
    }
    mid
}

/// `(M_n h)(t) = c2 min(4^{-2n} int_0^t h (h + e^{-4^n/2}) dtau, 4^{-(n+1)})`,
/// computed exactly on the piecewise-polynomial representation.
pub fn apply_mn(
    h: &PiecewiseFn,
    n: u32,
    params: &RecursionParams,
    max_degree: usize,
) -> Result<PiecewiseFn, ConfinementError> {
    h.check_nonneg_nondecreasing()?;
    let e_n = (-0.5 * 4f64.powi(n as i32)).exp();
    let scale = params.c2 * 4f64.powi(-2 * n as i32);
    let cap = params.c2 * 4f64.powi(-(n as i32 + 1));

    let mut breakpoints = vec![0.0];
    let mut pieces = Vec::new();
    let mut acc = 0.0;

    for (i, p) in h.pieces.iter().enumerate() {
        let deg = p.len() - 1;
        if 2 * deg + 1 > max_degree {
            return Err(ConfinementError::Resolution {
                level: n + 1,
                degree: 2 * deg + 1,
                max_degree,
            });
        }
        // integrand p^2 + e_n p
        let mut integrand = vec![0.0; 2 * deg + 1];
        for (a, &pa) in p.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (b, &pb) in p.iter().enumerate() {
                integrand[a + b] += pa * pb;
            }
            integrand[a] += e_n * pa;
        }
        let len = h.piece_len(i);
        let mut g = Vec::with_capacity(integrand.len() + 1);
        g.push(acc);
        g.extend(
            integrand
                .iter()
                .enumerate()
                .map(|(k, &c)| scale * len * c / (k + 1) as f64),
        );
        let end: f64 = g.iter().sum();
        let t0 = h.breakpoints[i];
        if acc >= cap {
            return Ok(PiecewiseFn {
                breakpoints,
                pieces,
                tail_constant: cap,
            });
        }
        if end >= cap {
            let u = solve_increasing(&g, cap);
            let mut pow = 1.0;
            for c in g.iter_mut() {
                *c *= pow;
                pow *= u;
            }
            breakpoints.push(t0 + u * len);
            pieces.push(g);
            return Ok(PiecewiseFn {
                breakpoints,
                pieces,
                tail_constant: cap,
            });
        }
        breakpoints.push(t0 + len);
        pieces.push(g);
        acc = end;
    }

    // beyond the last breakpoint h is constant, so the antiderivative is linear
    let h_inf = h.tail_constant;
    let slope = scale * h_inf * (h_inf + e_n);
    if acc >= cap {
        return Ok(PiecewiseFn {
            breakpoints,
            pieces,
            tail_constant: cap,
        });
    }
    if slope > 0.0 {
        let t0 = h.last_breakpoint();
        let len = (cap - acc) / slope;
        breakpoints.push(t0 + len);
        pieces.push(vec![acc, cap - acc]);
        Ok(PiecewiseFn {
            breakpoints,
            pieces,
            tail_constant: cap,
        })
    } else {
        Ok(PiecewiseFn {
            breakpoints,
            pieces,
            tail_constant: acc,
        })
    }
}

/// First time `g` reaches `level`.
pub fn hitting_time(g: &PiecewiseFn, level: f64) -> Result<f64, ConfinementError> {
    if g.eval(0.0) >= level {
        return Ok(0.0);
    }
    for i in 0..g.pieces.len() {
        if g.piece_end(i) >= level {
            let u = solve_increasing(&g.pieces[i], level);
            return Ok(g.breakpoints[i] + u * g.piece_len(i));
        }
    }
    if g.tail_constant >= level {
        return Ok(g.last_breakpoint());
    }
    Err(ConfinementError::LevelNotAttained {
        level,
        sup: g.tail_constant,
    })
}
