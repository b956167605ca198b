use std::f64::consts::LN_2;

use serde::Serialize;

use super::{ConfinementError, RecursionParams};

const LN_4: f64 = 2.0 * LN_2;

/// Parameters of the moving barrier `R_L(t) = 2 (phi(L) t^{1/3} ln^2 t + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeParams {
    pub c5: f64,
    pub c4: f64,
    pub l: f64,
}

impl EnvelopeParams {
    pub fn new(c5: f64, c4: f64, l: f64) -> Result<Self, ConfinementError> {
        if !(c5 > 0.0 && c5.is_finite()) {
            return Err(ConfinementError::Parameter(format!("c5 must be positive, got {c5}")));
        }
        if !(c4 > 0.0 && c4.is_finite()) {
            return Err(ConfinementError::Parameter(format!("c4 must be positive, got {c4}")));
        }
        if !(l > 1.0 / 3.0 && l.is_finite()) {
            return Err(ConfinementError::Parameter(format!("L must exceed 1/3, got {l}")));
        }
        Ok(Self { c5, c4, l })
    }
}

/// `phi(L) = 16 ((L - 1/3) / (c4 ln 4))^2 / c5^{1/3}`
pub fn phi_of_l(env: &EnvelopeParams) -> f64 {
    let s = (env.l - 1.0 / 3.0) / (env.c4 * LN_4);
    16.0 * s * s / env.c5.cbrt()
}

// log t is negative below 1, where the barrier is not meaningful
fn check_t(t: f64) -> Result<(), ConfinementError> {
    if t >= 1.0 && t.is_finite() {
        Ok(())
    } else {
        Err(ConfinementError::Parameter(format!("envelope needs t >= 1, got {t}")))
    }
}

pub fn envelope_r(env: &EnvelopeParams, t: f64) -> Result<f64, ConfinementError> {
    check_t(t)?;
    let lt = t.ln();
    Ok(2.0 * (phi_of_l(env) * t.cbrt() * lt * lt + 1.0))
}

/// `2 phi(L) t^{-2/3} ln t (ln t / 3 + 2)`
pub fn envelope_r_derivative(env: &EnvelopeParams, t: f64) -> Result<f64, ConfinementError> {
    check_t(t)?;
    let lt = t.ln();
    Ok(2.0 * phi_of_l(env) * lt * (lt / 3.0 + 2.0) / (t.cbrt() * t.cbrt()))
}

/// Smallest `L` with `2 R_L(t) >= d`, or `None` when every `L > 1/3` already dominates.
pub fn smallest_dominating_l(c5: f64, c4: f64, t: f64, d: f64) -> Result<Option<f64>, ConfinementError> {
    EnvelopeParams::new(c5, c4, 1.0)?;
    check_t(t)?;
    let lt = t.ln();
    let needed_phi = (d / 4.0 - 1.0) / (t.cbrt() * lt * lt);
    if !(needed_phi > 0.0) {
        return Ok(None);
    }
    if !needed_phi.is_finite() {
        return Err(ConfinementError::Parameter(format!("no finite L dominates d = {d} at t = {t}")));
    }
    let s = (needed_phi * c5.cbrt() / 16.0).sqrt();
    Ok(Some(1.0 / 3.0 + s * c4 * LN_4))
}

/// The proof constants that follow from `c3, c4, c5` and `n0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeConstants {
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    /// `c3 c5^{1/3}`
    pub c7: f64,
    /// `1/3 + c4 ln 4 / 2`
    pub l0: f64,
    /// `c5 4^{3(n0 - 1)}`
    pub t_switch: f64,
    pub t_switch_at_least_e: bool,
    /// Constants that only exist through unquantified inequalities.
    pub non_derivable: Vec<String>,
}

impl EnvelopeConstants {
    pub fn new(params: &RecursionParams, c5: f64) -> Self {
        let t_switch = c5 * 4f64.powi(3 * (params.n0 as i32 - 1));
        Self {
            c3: params.c3,
            c4: params.c4,
            c5,
            c7: params.c3 * c5.cbrt(),
            l0: 1.0 / 3.0 + params.c4 * LN_4 / 2.0,
            t_switch,
            t_switch_at_least_e: t_switch >= std::f64::consts::E,
            non_derivable: vec!["L1".into(), "L2".into(), "c8".into()],
        }
    }
}
