//! The tail-mass recursion behind the confinement bound, evaluated exactly,
//! plus the moving envelope and empirical checks against simulation output.
//!
//! The recursion starts from `g_0 = c1` and applies
//!
//! ```text
//! (M_n h)(t) = c2 min(4^{-2n} int_0^t h (h + e^{-4^n/2}) dtau, 4^{-(n+1)})
//! ```
//!
//! Its hitting times `t_n` grow like `4^{3n}`, and the sequence
//! `b_{n,j}` that dominates `g_{n+j}(t_n)` decays doubly exponentially in `j`.

mod empirical;
mod envelope;
mod piecewise;
mod recursion;

use serde::Serialize;
use thiserror::Error;

pub use empirical::{
    empirical_tail_inequality, envelope_comparison, fit_growth_exponent, fit_growth_exponent_between,
    EnvelopeComparison, GrowthFit, TailInequalityReport, TailInequalityRow, MIN_FIT_DECADES, MIN_FIT_RECORDS,
};
pub use envelope::{
    envelope_r, envelope_r_derivative, phi_of_l, smallest_dominating_l, EnvelopeConstants, EnvelopeParams,
};
pub use piecewise::{apply_mn, hitting_time, PiecewiseFn, DEFAULT_MAX_DEGREE};
pub use recursion::{
    b_normalized_log_sequence, c_normalized_log_sequence, compute_b_sequence, compute_c_sequence,
    compute_g_sequence, consistency_g_vs_b, sandwich_report, DOMINANCE_SLACK, sweep_kur_bound, verify_kur_bound,
    BSequence, BoundCertificate, DominanceReport, DominanceRow, GSequence, SandwichReport, SandwichRow,
    SweepReport, Witness,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfinementError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("g_{level} needs polynomial degree {degree}, above the cap {max_degree}")]
    Resolution {
        level: u32,
        degree: usize,
        max_degree: usize,
    },
    #[error("level {level} is never attained (supremum {sup})")]
    LevelNotAttained { level: f64, sup: f64 },
    #[error("n = {n} is below n0 = {n0}; the bound is only asserted for n >= n0")]
    BelowN0 { n: u32, n0: u32 },
    #[error("tail threshold {threshold} is not among the recorded tails")]
    MissingThreshold { threshold: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Recursion constants `c1, c2, c6` and everything derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionParams {
    pub c1: f64,
    pub c2: f64,
    pub c6: f64,
    /// `c2 = 4^alpha`
    pub alpha: f64,
    /// `2 c2 c6 = 4^beta`
    pub beta: f64,
    /// smallest `j0 >= 1` with `j0 >= alpha + 1` and `2 j0 >= beta`
    pub j0: u32,
    /// smallest `n0 >= 1` with `2 c2 c6 4^{3 n0} >= 4`
    pub n0: u32,
    /// `4^{alpha + 2^{-j0}}`
    pub c3: f64,
    /// `2^{-j0}`
    pub c4: f64,
}

impl RecursionParams {
    pub fn new(c1: f64, c2: f64, c6: f64) -> Result<Self, ConfinementError> {
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(ConfinementError::Parameter(format!("c1 must be positive, got {c1}")));
        }
        if !(c2 >= 2.0 && c2.is_finite()) {
            return Err(ConfinementError::Parameter(format!(
                "c2 must satisfy c2 >= 2, got {c2}"
            )));
        }
        if !(c6 > 0.0 && c6.is_finite()) {
            return Err(ConfinementError::Parameter(format!("c6 must be positive, got {c6}")));
        }
        let alpha = c2.log2() / 2.0;
        let beta = (2.0 * c2 * c6).log2() / 2.0;
        let j0 = 1f64.max((alpha + 1.0).ceil()).max((beta / 2.0).ceil()) as u32;
        let mut n0 = 1u32;
        while 2.0 * c2 * c6 * 4f64.powi(3 * n0 as i32) < 4.0 {
            n0 += 1;
        }
        let c4 = 2f64.powi(-(j0 as i32));
        let c3 = 4f64.powf(alpha + c4);
        Ok(Self {
            c1,
            c2,
            c6,
            alpha,
            beta,
            j0,
            n0,
            c3,
            c4,
        })
    }

    /// `c2 4^{-n}`, the cap reached by `g_n` at `t_n`.
    pub fn level(&self, n: u32) -> f64 {
        self.c2 * 4f64.powi(-(n as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_for_reference_params() {
        let p = RecursionParams::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(p.alpha, 0.5);
        assert_eq!(p.beta, 1.0);
        assert_eq!(p.j0, 2);
        assert_eq!(p.c4, 0.25);
        assert!((p.c3 - 4f64.powf(0.75)).abs() < 1e-15);
        assert!((p.c3 - 2.828_43).abs() < 1e-5);
        assert_eq!(p.n0, 1);
    }

    #[test]
    fn invariants_over_a_grid() {
        for &c2 in &[2.0, 2.5, 4.0, 7.9, 64.0] {
            for &c6 in &[1e-3, 0.1, 1.0, 10.0] {
                let p = RecursionParams::new(1.0, c2, c6).unwrap();
                assert!(p.j0 >= 1);
                assert!(p.c4 > 0.0 && p.c4 <= 1.0);
                assert!(p.c3 >= 1.0);
                assert!(p.j0 as f64 >= p.alpha + 1.0 && 2.0 * p.j0 as f64 >= p.beta);
                assert!(2.0 * c2 * c6 * 4f64.powi(3 * p.n0 as i32) >= 4.0);
                if p.n0 > 1 {
                    assert!(2.0 * c2 * c6 * 4f64.powi(3 * (p.n0 as i32 - 1)) < 4.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(RecursionParams::new(1.0, 1.9, 1.0).is_err());
        assert!(RecursionParams::new(0.0, 2.0, 1.0).is_err());
        assert!(RecursionParams::new(1.0, 2.0, -1.0).is_err());
        assert!(RecursionParams::new(1.0, f64::NAN, 1.0).is_err());
    }
}
