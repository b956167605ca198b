//! Discrete vorticity and its integral functionals.
//!
//! A [`VorticityEnsemble`] is a finite list of blobs standing in for a compactly
//! supported vorticity. Every functional is a fixed-order sum over the blobs so
//! results are reproducible bit for bit. Sums start from `+0.0` (the std `Sum`
//! starts from `-0.0`), so an empty tail reads `0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{stream_kernel, CylinderPoint, KernelError};
use crate::par::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("blob {index}: {reason}")]
    InvalidBlob { index: usize, reason: String },
    #[error("blob {index} has negative circulation {circulation} in a non-negative ensemble")]
    NegativeCirculation { index: usize, circulation: f64 },
    #[error("total mass is zero; the center of mass is undefined")]
    ZeroMass,
    #[error("no blob carries circulation; the support is empty")]
    EmptySupport,
    #[error("blob {index} has zero core radius, so its self-energy diverges")]
    DiagonalSingular { index: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexBlob {
    pub pos: CylinderPoint,
    pub circulation: f64,
    pub core_radius: f64,
}

impl VortexBlob {
    pub fn new(x: f64, y: f64, circulation: f64, core_radius: f64) -> Result<Self, FieldError> {
        let pos = CylinderPoint::new(x, y)?;
        let blob = Self {
            pos,
            circulation,
            core_radius,
        };
        blob.validate(0)?;
        Ok(blob)
    }

    fn validate(&self, index: usize) -> Result<(), FieldError> {
        if !self.circulation.is_finite() {
            return Err(FieldError::InvalidBlob {
                index,
                reason: format!("non-finite circulation {}", self.circulation),
            });
        }
        if !(self.core_radius >= 0.0) || !self.core_radius.is_finite() {
            return Err(FieldError::InvalidBlob {
                index,
                reason: format!("core radius {} is not a finite non-negative number", self.core_radius),
            });
        }
        Ok(())
    }
}

/// Ordered blob collection. Blob order never changes; it fixes every summation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VorticityEnsemble {
    blobs: Vec<VortexBlob>,
    nonneg: bool,
}

impl VorticityEnsemble {
    pub fn new(blobs: Vec<VortexBlob>, nonneg: bool) -> Result<Self, FieldError> {
        for (index, b) in blobs.iter().enumerate() {
            b.validate(index)?;
            if nonneg && b.circulation < 0.0 {
                return Err(FieldError::NegativeCirculation {
                    index,
                    circulation: b.circulation,
                });
            }
        }
        Ok(Self { blobs, nonneg })
    }

    pub fn blobs(&self) -> &[VortexBlob] {
        &self.blobs
    }

    pub fn len(&self) -> usize {
        self.blobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blobs.is_empty()
    }

    pub fn nonneg(&self) -> bool {
        self.nonneg
    }

    /// Replaces blob positions, keeping circulations and cores. `y` values are wrapped.
    pub(crate) fn with_positions(&self, xs: &[f64], ys: &[f64]) -> Result<Self, KernelError> {
        let blobs = self
            .blobs
            .iter()
            .zip(xs.iter().zip(ys))
            .map(|(b, (&x, &y))| {
                Ok(VortexBlob {
                    pos: CylinderPoint::new(x, y)?,
                    ..*b
                })
            })
            .collect::<Result<Vec<_>, KernelError>>()?;
        Ok(Self {
            blobs,
            nonneg: self.nonneg,
        })
    }

    /// Shift of every blob by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self, FieldError> {
        let blobs = self
            .blobs
            .iter()
            .map(|b| {
                Ok(VortexBlob {
                    pos: b.pos.translated(dx, dy)?,
                    ..*b
                })
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(Self {
            blobs,
            nonneg: self.nonneg,
        })
    }

    /// Concatenation; blobs of `self` come first.
    pub fn merged(&self, other: &VorticityEnsemble) -> Self {
        let mut blobs = self.blobs.clone();
        blobs.extend_from_slice(&other.blobs);
        Self {
            blobs,
            nonneg: self.nonneg && other.nonneg,
        }
    }
}

/// `m = sum of circulations`.
pub fn total_mass(ens: &VorticityEnsemble) -> f64 {
    ens.blobs.iter().map(|b| b.circulation).fold(0.0, |acc, v| acc + v)
}

/// Unnormalized horizontal center `h = sum x_j G_j`.
pub fn horizontal_center(ens: &VorticityEnsemble) -> f64 {
    ens.blobs.iter().map(|b| b.pos.x() * b.circulation).fold(0.0, |acc, v| acc + v)
}

/// Shifts the ensemble by `-h/m` in `x` so that its horizontal center vanishes.
pub fn recenter_to_zero(ens: &VorticityEnsemble) -> Result<VorticityEnsemble, FieldError> {
    let m = total_mass(ens);
    if m == 0.0 {
        return Err(FieldError::ZeroMass);
    }
    let shift = -horizontal_center(ens) / m;
    let mut out = ens.translated(shift, 0.0)?;
    // One correction pass absorbs the rounding of the first shift.
    let residual = -horizontal_center(&out) / m;
    if residual != 0.0 {
        out = out.translated(residual, 0.0)?;
    }
    Ok(out)
}

fn pair_delta(a: &VortexBlob, b: &VortexBlob) -> f64 {
    a.core_radius.max(b.core_radius)
}

/// Discrete regularized energy `sum_i sum_j G_i G_j Gamma_delta(z_i - z_j)`.
///
/// Diagonal terms use the blob's own core radius and are constants of the
/// motion; off-diagonal pairs use the larger of the two radii.
pub fn regularized_energy(ens: &VorticityEnsemble) -> Result<f64, FieldError> {
    let blobs = &ens.blobs;
    if let Some(index) = blobs.iter().position(|b| b.core_radius == 0.0) {
        return Err(FieldError::DiagonalSingular { index });
    }
    let rows: Vec<Result<f64, FieldError>> = (0..blobs.len())
        .into_par_iter()
        .map(|i| {
            let bi = &blobs[i];
            let mut row = 0.0;
            for bj in blobs {
                let d = bi.pos.displacement_from(&bj.pos);
                row += bj.circulation * stream_kernel(d, pair_delta(bi, bj))?;
            }
            Ok(bi.circulation * row)
        })
        .collect();
    let mut e = 0.0;
    for r in rows {
        e += r?;
    }
    Ok(e)
}

/// Stream function `Psi(z) = sum_j G_j Gamma_{delta_j}(z - z_j)`.
pub fn stream_at(ens: &VorticityEnsemble, z: CylinderPoint) -> Result<f64, FieldError> {
    let mut psi = 0.0;
    for b in &ens.blobs {
        psi += b.circulation * stream_kernel(z.displacement_from(&b.pos), b.core_radius)?;
    }
    Ok(psi)
}

/// `sum |x_j| G_j`
pub fn abs_first_moment(ens: &VorticityEnsemble) -> f64 {
    ens.blobs.iter().map(|b| b.pos.x().abs() * b.circulation).fold(0.0, |acc, v| acc + v)
}

/// Horizontal extent `max x_j - min x_j` over blobs with non-zero circulation.
pub fn support_diameter(ens: &VorticityEnsemble) -> Result<f64, FieldError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for b in ens.blobs.iter().filter(|b| b.circulation != 0.0) {
        lo = lo.min(b.pos.x());
        hi = hi.max(b.pos.x());
    }
    if lo > hi {
        return Err(FieldError::EmptySupport);
    }
    Ok(hi - lo)
}

/// Circulation carried by blobs with `|x| > r`.
pub fn tail_mass(ens: &VorticityEnsemble, r: f64) -> f64 {
    ens.blobs
        .iter()
        .filter(|b| b.pos.x().abs() > r)
        .map(|b| b.circulation)
        .fold(0.0, |acc, v| acc + v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Right,
    Left,
}

/// `k_a = sum_{x_j > a} (x_j - a)^2 G_j` on the right, mirrored on the left.
pub fn tail_second_moment(ens: &VorticityEnsemble, a: f64, side: Side) -> f64 {
    ens.blobs
        .iter()
        .filter_map(|b| {
            let x = match side {
                Side::Right => b.pos.x(),
                Side::Left => -b.pos.x(),
            };
            (x > a).then(|| (x - a) * (x - a) * b.circulation)
        })
        .fold(0.0, |acc, v| acc + v)
}

/// Tail masses `f_n` for the given exponents: `f_0` is the total mass and
/// `f_n = tail_mass(4^n)` for `n >= 1`.
pub fn tail_profile(ens: &VorticityEnsemble, exponents: &[u32]) -> Vec<f64> {
    exponents
        .iter()
        .map(|&n| {
            if n == 0 {
                total_mass(ens)
            } else {
                tail_mass(ens, tail_threshold(n))
            }
        })
        .collect()
}

/// `4^n`
pub fn tail_threshold(n: u32) -> f64 {
    4f64.powi(n as i32)
}

/// One diagnostics snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub h_center: f64,
    pub energy: f64,
    pub abs_moment: f64,
    pub diameter: f64,
    pub sup_u1: f64,
    /// `f_n` in the order of the configured tail exponents.
    pub tails: Vec<f64>,
}
