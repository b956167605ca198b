//! Points on the cylinder `S = R x T` and the cylindrical Biot-Savart kernel.
//!
//! The velocity kernel is
//!
//! ```text
//! k(x, y) = (-sin y, sinh x) / (2 (cosh x - cos y))
//! ```
//!
//! and the stream kernel is `G(x, y) = 1/2 log(cosh x - cos y)`, so that
//! `k = (-dG/dy, dG/dx)`. Blob regularization adds `delta^2 / 2` to the
//! denominator (inside the logarithm for `G`), which keeps the pair
//! `(k_delta, G_delta)` consistent for every `delta >= 0`.
//!
//! All evaluations go through one cancellation-free routine. With
//! `w = e^{-|dx|}` and `m = 1 - w`, the denominator is rescaled by `2w`:
//!
//! ```text
//! 2w (cosh dx - cos dy + delta^2/2) = m^2 + 2w (1 - cos dy) + w delta^2
//! ```
//!
//! which stays finite for any `|dx|` and is relatively accurate near the
//! origin, where `cosh dx - cos dy` would otherwise lose every digit.

use std::f64::consts::{LN_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("non-finite coordinate {0}")]
    NonFinite(f64),
    #[error("kernel evaluated at a singular displacement (dx = {dx}, dy = {dy}) with zero core radius")]
    Singular { dx: f64, dy: f64 },
    #[error("core radius must be non-negative, got {0}")]
    NegativeDelta(f64),
}

/// Wraps an angle into `[0, 2pi)`.
pub fn normalize_y(y: f64) -> Result<f64, KernelError> {
    if !y.is_finite() {
        return Err(KernelError::NonFinite(y));
    }
    Ok(wrap_angle(y))
}

#[inline]
pub(crate) fn wrap_angle(y: f64) -> f64 {
    if (0.0..TAU).contains(&y) {
        return y;
    }
    let w = y.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2pi for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Canonical representative of an angular separation in `[-pi, pi)`.
#[inline]
pub fn canonical_dy(dy: f64) -> f64 {
    if (-PI..PI).contains(&dy) {
        return dy;
    }
    let w = (dy + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// A point `z = (x, y)` on the cylinder, `y` kept in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    x: f64,
    y: f64,
}

impl CylinderPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, KernelError> {
        if !x.is_finite() {
            return Err(KernelError::NonFinite(x));
        }
        Ok(Self {
            x,
            y: normalize_y(y)?,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Displacement `self - other`.
    pub fn displacement_from(&self, other: &CylinderPoint) -> Displacement {
        Displacement::new(self.x - other.x, self.y - other.y)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self, KernelError> {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Separation between two cylinder points; `dy` is stored modulo `2pi` in `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub dx: f64,
    pub dy: f64,
}

impl Displacement {
    pub fn new(dx: f64, dy: f64) -> Self {
        Self {
            dx,
            dy: canonical_dy(dy),
        }
    }

    pub fn is_singular(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0
    }
}

impl std::ops::Neg for Displacement {
    type Output = Displacement;

    fn neg(self) -> Displacement {
        Displacement::new(-self.dx, -self.dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocity2 {
    pub u1: f64,
    pub u2: f64,
}

impl Velocity2 {
    pub const ZERO: Velocity2 = Velocity2 { u1: 0.0, u2: 0.0 };

    pub fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.u1 * s, self.u2 * s)
    }
}

impl std::ops::Add for Velocity2 {
    type Output = Velocity2;

    fn add(self, o: Velocity2) -> Velocity2 {
        Velocity2::new(self.u1 + o.u1, self.u2 + o.u2)
    }
}

impl std::ops::Neg for Velocity2 {
    type Output = Velocity2;

    fn neg(self) -> Velocity2 {
        Velocity2::new(-self.u1, -self.u2)
    }
}

/// Shared intermediate quantities of one kernel evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelParts {
    /// `e^{-|dx|}`
    w: f64,
    /// `1 - e^{-|dx|}`, computed without cancellation
    m: f64,
    /// `1 - cos dy`, computed without cancellation
    omc: f64,
    sin_dy: f64,
    sign_x: f64,
    /// `2w (cosh dx - cos dy + delta^2/2)`
    q: f64,
}

#[inline]
pub(crate) fn kernel_parts(dx: f64, dy: f64, delta_sq: f64) -> KernelParts {
    let ax = dx.abs();
    let (w, m) = if ax > 0.5 {
        let w = (-ax).exp();
        (w, 1.0 - w)
    } else {
        let m = -(-ax).exp_m1();
        (1.0 - m, m)
    };
    let (sin_dy, cos_dy) = dy.sin_cos();
    let omc = if cos_dy > 0.0 {
        sin_dy * sin_dy / (1.0 + cos_dy)
    } else {
        1.0 - cos_dy
    };
    let q = m * m + 2.0 * w * omc + w * delta_sq;
    KernelParts {
        w,
        m,
        omc,
        sin_dy,
        sign_x: if dx < 0.0 { -1.0 } else { 1.0 },
        q,
    }
}

impl KernelParts {
    #[inline]
    pub(crate) fn velocity(&self) -> (f64, f64) {
        let k1 = -self.sin_dy * self.w / self.q;
        let k2 = self.sign_x * self.m * (1.0 + self.w) / (2.0 * self.q);
        (k1, k2)
    }

    #[inline]
    fn stream(&self, ax: f64) -> f64 {
        0.5 * (self.q.ln() - LN_2 + ax)
    }
}

/// Velocity kernel for the hot loops: `dy` may lie anywhere in `(-2pi, 2pi)`.
/// Exactly odd in `(dx, dy)`. Returns `None` when the denominator vanishes.
#[inline]
pub(crate) fn kernel_fast(dx: f64, dy: f64, delta_sq: f64) -> Option<(f64, f64)> {
    let dy = if dy > PI {
        dy - TAU
    } else if dy < -PI {
        dy + TAU
    } else {
        dy
    };
    let parts = kernel_parts(dx, dy, delta_sq);
    if parts.q == 0.0 {
        None
    } else {
        Some(parts.velocity())
    }
}

fn check_delta(delta: f64) -> Result<f64, KernelError> {
    if delta.is_nan() || delta < 0.0 {
        return Err(KernelError::NegativeDelta(delta));
    }
    Ok(delta * delta)
}

fn checked_parts(d: Displacement, delta: f64) -> Result<KernelParts, KernelError> {
    if !d.dx.is_finite() || !d.dy.is_finite() {
        return Err(KernelError::NonFinite(if d.dx.is_finite() { d.dy } else { d.dx }));
    }
    let delta_sq = check_delta(delta)?;
    let parts = kernel_parts(d.dx, d.dy, delta_sq);
    if parts.q == 0.0 {
        return Err(KernelError::Singular { dx: d.dx, dy: d.dy });
    }
    Ok(parts)
}

/// The cylindrical Biot-Savart kernel `(-sin dy, sinh dx) / (2 (cosh dx - cos dy))`.
pub fn biot_savart_kernel(d: Displacement) -> Result<Velocity2, KernelError> {
    regularized_kernel(d, 0.0)
}

/// Blob kernel `(-sin dy, sinh dx) / (2 (cosh dx - cos dy + delta^2/2))`.
pub fn regularized_kernel(d: Displacement, delta: f64) -> Result<Velocity2, KernelError> {
    let (k1, k2) = checked_parts(d, delta)?.velocity();
    Ok(Velocity2::new(k1, k2))
}

/// `k2(d) - sign(dx)/2`, the approach of the vertical kernel to its far-field
/// value, evaluated without subtracting nearly equal numbers.
///
/// Equals `sign(dx) (cos dy - e^{-|dx|} - delta^2/2) / (2 (cosh dx - cos dy + delta^2/2))`.
pub fn k2_far_field_deviation(d: Displacement, delta: f64) -> Result<f64, KernelError> {
    let p = checked_parts(d, delta)?;
    let delta_sq = delta * delta;
    // cos dy - w = m - (1 - cos dy)
    Ok(p.sign_x * p.w * (p.m - p.omc - 0.5 * delta_sq) / p.q)
}

/// Stream kernel `1/2 log(cosh dx - cos dy + delta^2/2)`.
pub fn stream_kernel(d: Displacement, delta: f64) -> Result<f64, KernelError> {
    let p = checked_parts(d, delta)?;
    Ok(p.stream(d.dx.abs()))
}

/// `(1 + |dx|) e^{-|dx|}`, an envelope for `|dx * k1|` away from the origin.
pub fn k1_majorant(dx: f64) -> f64 {
    let a = dx.abs();
    (1.0 + a) * (-a).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn normalize_y_examples() {
        assert_eq!(normalize_y(0.0).unwrap(), 0.0);
        assert_eq!(normalize_y(TAU).unwrap(), 0.0);
        assert!(close(normalize_y(-PI / 2.0).unwrap(), 1.5 * PI, 1e-15));
        assert_eq!(normalize_y(-1e-20).unwrap(), 0.0);
        assert!(normalize_y(f64::NAN).is_err());
        assert!(normalize_y(f64::INFINITY).is_err());
        let y = normalize_y(123.456).unwrap();
        assert_eq!(normalize_y(y).unwrap(), y);
    }

    #[test]
    fn point_construction_rejects_non_finite() {
        assert!(CylinderPoint::new(f64::NAN, 0.0).is_err());
        assert!(CylinderPoint::new(0.0, f64::NEG_INFINITY).is_err());
        let p = CylinderPoint::new(1.0, 7.0).unwrap();
        assert!((0.0..TAU).contains(&p.y()));
    }

    #[test]
    fn canonical_dy_range() {
        for &dy in &[PI, -PI, 3.0 * PI, -3.0 * PI, 0.1, TAU - 0.1, -TAU + 0.1] {
            let c = canonical_dy(dy);
            assert!((-PI..PI).contains(&c), "{dy} -> {c}");
        }
        assert!(close(canonical_dy(TAU - 0.1), -0.1, 1e-14));
    }

    #[test]
    fn kernel_examples() {
        let k = biot_savart_kernel(Displacement::new(0.0, PI)).unwrap();
        assert!(k.u1.abs() < 1e-16 && k.u2 == 0.0);

        // closed form coth(x/2)/2 at x = 5
        let oracle = 0.5 / (2.5f64).tanh();
        let k = biot_savart_kernel(Displacement::new(5.0, 0.0)).unwrap();
        assert_eq!(k.u1, 0.0);
        assert!(close(k.u2, oracle, 1e-14));
        assert!((k.u2 - 0.506_783_6).abs() < 1e-7);

        let k = biot_savart_kernel(Displacement::new(20.0, 0.0)).unwrap();
        assert!((k.u2 - 0.5).abs() < 1e-8);
    }

    #[test]
    fn singular_evaluation_is_an_error() {
        assert!(matches!(
            biot_savart_kernel(Displacement::new(0.0, TAU)),
            Err(KernelError::Singular { .. })
        ));
        assert!(stream_kernel(Displacement::new(0.0, 0.0), 0.0).is_err());
        assert!(matches!(
            regularized_kernel(Displacement::new(1.0, 0.0), -0.1),
            Err(KernelError::NegativeDelta(_))
        ));
    }

    #[test]
    fn regularized_kernel_at_origin_and_limit() {
        let k = regularized_kernel(Displacement::new(0.0, 0.0), 0.1).unwrap();
        assert_eq!(k, Velocity2::ZERO);
        let exact = biot_savart_kernel(Displacement::new(5.0, 0.0)).unwrap().u2;
        let mut prev = f64::INFINITY;
        for &delta in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let err = (regularized_kernel(Displacement::new(5.0, 0.0), delta).unwrap().u2 - exact).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-9);
        assert_eq!(
            regularized_kernel(Displacement::new(0.3, -1.2), 0.0).unwrap(),
            biot_savart_kernel(Displacement::new(0.3, -1.2)).unwrap()
        );
    }

    #[test]
    fn stream_kernel_examples() {
        let g = stream_kernel(Displacement::new(0.0, PI), 0.0).unwrap();
        assert!(close(g, 0.5 * 2f64.ln(), 1e-15));
        assert!((g - 0.346_573_6).abs() < 1e-7);

        let g = stream_kernel(Displacement::new(10.0, 0.0), 0.0).unwrap();
        let oracle = 0.5 * (10f64.cosh() - 1.0).ln();
        assert!(close(g, oracle, 1e-14));
        assert!((g - (10.0 - 2f64.ln()) / 2.0).abs() < 1e-4);

        // G(d) - log|d| stays bounded as d -> 0 (it tends to -1/2 log 2)
        for &r in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let g = stream_kernel(Displacement::new(r * 0.6, r * 0.8), 0.0).unwrap();
            assert!((g - r.ln() + 0.5 * LN_2).abs() < 1e-3, "r={r}: {}", g - r.ln());
        }
    }

    #[test]
    fn far_field_deviation_matches_closed_form() {
        for &x in &[1.0f64, 2.0, 5.0, 10.0, 20.0, 40.0] {
            for &s in &[1.0, -1.0] {
                let dev = k2_far_field_deviation(Displacement::new(s * x, 0.0), 0.0).unwrap();
                let oracle = s * (-x).exp() / (1.0 - (-x).exp());
                assert!(close(dev, oracle, 1e-13), "x={x}: {dev} vs {oracle}");
            }
        }
    }

    #[test]
    fn majorant_values() {
        assert_eq!(k1_majorant(0.0), 1.0);
        assert!(close(k1_majorant(10.0), 11.0 * (-10f64).exp(), 1e-15));
        assert_eq!(k1_majorant(-3.0), k1_majorant(3.0));
    }

    #[test]
    fn kernel_is_finite_far_away() {
        let k = biot_savart_kernel(Displacement::new(800.0, 1.0)).unwrap();
        assert!(k.u1 == 0.0 && k.u2 == 0.5);
        let g = stream_kernel(Displacement::new(-800.0, 1.0), 0.0).unwrap();
        assert!(close(g, (800.0 - LN_2) / 2.0, 1e-15));
    }
}
