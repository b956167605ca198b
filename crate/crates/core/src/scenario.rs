//! Initial ensembles: disc patches, random clouds and vortex pairs.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{recenter_to_zero, FieldError, VortexBlob, VorticityEnsemble};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    DiscPatch,
    TwoPatches,
    RandomCloud,
    VortexPair,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::DiscPatch => "disc_patch",
            Self::TwoPatches => "two_patches",
            Self::RandomCloud => "random_cloud",
            Self::VortexPair => "vortex_pair",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disc_patch" => Ok(Self::DiscPatch),
            "two_patches" => Ok(Self::TwoPatches),
            "random_cloud" => Ok(Self::RandomCloud),
            "vortex_pair" => Ok(Self::VortexPair),
            _ => Err(ScenarioError::Invalid(format!(
                "unknown scenario kind {s:?} (expected disc_patch, two_patches, random_cloud or vortex_pair)"
            ))),
        }
    }
}

/// Description of an initial ensemble.
///
/// `circulation_scale` is the vorticity level for patches, the total
/// circulation for a random cloud and the circulation of each vortex in a pair.
/// `offset` is the horizontal distance of each pair member, or each patch
/// center, from `center_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub offset: f64,
    pub blob_count: usize,
    pub delta: f64,
    pub circulation_scale: f64,
    pub nonneg: bool,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::DiscPatch,
            center_x: 0.0,
            center_y: PI,
            radius: 0.5,
            offset: 0.5,
            blob_count: 500,
            delta: 0.05,
            circulation_scale: 1.0,
            nonneg: true,
            seed: 0,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.blob_count == 0 {
            return bad("blob_count must be at least 1".into());
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be finite and non-negative, got {}", self.delta));
        }
        if self.delta == 0.0 && self.kind != ScenarioKind::VortexPair {
            return bad(format!("delta = 0 is only allowed for vortex_pair, not {}", self.kind));
        }
        if !self.circulation_scale.is_finite() || self.circulation_scale == 0.0 {
            return bad(format!("circulation_scale must be finite and non-zero, got {}", self.circulation_scale));
        }
        if self.nonneg && self.circulation_scale < 0.0 {
            return bad("nonneg scenarios need a positive circulation_scale".into());
        }
        if !self.center_x.is_finite() || !self.center_y.is_finite() {
            return bad("center must be finite".into());
        }
        if !(self.offset >= 0.0 && self.offset.is_finite()) {
            return bad(format!("offset must be finite and non-negative, got {}", self.offset));
        }
        match self.kind {
            ScenarioKind::DiscPatch | ScenarioKind::TwoPatches => {
                if !(self.radius > 0.0 && self.radius < PI) {
                    return bad(format!("patch radius must lie in (0, pi), got {}", self.radius));
                }
                if self.kind == ScenarioKind::TwoPatches && self.blob_count < 2 {
                    return bad("two_patches needs at least 2 blobs".into());
                }
            }
            ScenarioKind::VortexPair => {
                if self.blob_count != 2 {
                    return bad(format!("vortex_pair has exactly 2 blobs, got blob_count = {}", self.blob_count));
                }
                if self.offset == 0.0 {
                    return bad("vortex_pair needs a positive offset".into());
                }
            }
            ScenarioKind::RandomCloud => {}
        }
        Ok(())
    }
}

/// Grid cells of spacing `h = sqrt(pi r^2 / n)` whose centers lie in the disc.
/// The grid is symmetric about the disc center.
fn disc_blobs(cx: f64, cy: f64, r: f64, n: usize, omega: f64, delta: f64, out: &mut Vec<VortexBlob>) -> Result<(), ScenarioError> {
    let h = (PI * r * r / n as f64).sqrt();
    let m = (2.0 * r / h).ceil() as usize + 1;
    let mid = (m - 1) as f64 / 2.0;
    let gamma = h * h * omega;
    for i in 0..m {
        let dx = (i as f64 - mid) * h;
        for j in 0..m {
            let dy = (j as f64 - mid) * h;
            if dx * dx + dy * dy <= r * r {
                out.push(VortexBlob::new(cx + dx, cy + dy, gamma, delta)?);
            }
        }
    }
    Ok(())
}

/// Deterministic in `spec` (including `seed`).
pub fn build_scenario(spec: &ScenarioSpec) -> Result<VorticityEnsemble, ScenarioError> {
    spec.validate()?;
    let mut blobs = Vec::with_capacity(spec.blob_count);
    let (cx, cy, s, d) = (spec.center_x, spec.center_y, spec.circulation_scale, spec.delta);
    match spec.kind {
        ScenarioKind::DiscPatch => disc_blobs(cx, cy, spec.radius, spec.blob_count, s, d, &mut blobs)?,
        ScenarioKind::TwoPatches => {
            let half = spec.blob_count / 2;
            disc_blobs(cx - spec.offset, cy, spec.radius, half, s, d, &mut blobs)?;
            disc_blobs(cx + spec.offset, cy, spec.radius, spec.blob_count - half, s, d, &mut blobs)?;
        }
        ScenarioKind::RandomCloud => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let gamma = s / spec.blob_count as f64;
            for _ in 0..spec.blob_count {
                let x = rng.gen_range(-1.0..1.0);
                let y = rng.gen_range(0.0..TAU);
                blobs.push(VortexBlob::new(x, y, gamma, d)?);
            }
        }
        ScenarioKind::VortexPair => {
            blobs.push(VortexBlob::new(cx - spec.offset, cy, s, d)?);
            blobs.push(VortexBlob::new(cx + spec.offset, cy, s, d)?);
        }
    }
    if blobs.is_empty() {
        return Err(ScenarioError::Invalid("patch resolution too coarse: no grid cell inside the disc".into()));
    }
    let ens = VorticityEnsemble::new(blobs, spec.nonneg)?;
    Ok(if spec.nonneg { recenter_to_zero(&ens)? } else { ens })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{horizontal_center, total_mass};

    fn pair() -> ScenarioSpec {
        ScenarioSpec {
            kind: ScenarioKind::VortexPair,
            center_y: 0.0,
            offset: 0.5,
            blob_count: 2,
            delta: 0.0,
            ..ScenarioSpec::default()
        }
    }

    #[test]
    fn vortex_pair_layout() {
        let ens = build_scenario(&pair()).unwrap();
        let b = ens.blobs();
        assert_eq!((b[0].pos.x(), b[0].pos.y()), (-0.5, 0.0));
        assert_eq!((b[1].pos.x(), b[1].pos.y()), (0.5, 0.0));
        assert_eq!(horizontal_center(&ens), 0.0);
    }

    #[test]
    fn disc_patch_mass_approaches_area() {
        let spec = ScenarioSpec {
            blob_count: 10_000,
            ..ScenarioSpec::default()
        };
        let ens = build_scenario(&spec).unwrap();
        let m = total_mass(&ens);
        assert!((m - PI / 4.0).abs() < 0.01 * PI / 4.0, "mass {m}");
        assert!((ens.len() as f64 - 10_000.0).abs() < 200.0);
        assert!(horizontal_center(&ens).abs() < 1e-14);
    }

    #[test]
    fn random_cloud_is_seeded() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::RandomCloud,
            blob_count: 100,
            seed: 7,
            ..ScenarioSpec::default()
        };
        let a = build_scenario(&spec).unwrap();
        let b = build_scenario(&spec).unwrap();
        assert_eq!(a, b);
        let c = build_scenario(&ScenarioSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, c);
        assert!((total_mass(&a) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_invalid_specs() {
        let disc = ScenarioSpec::default();
        assert!(build_scenario(&ScenarioSpec { radius: 3.2, ..disc.clone() }).is_err());
        assert!(build_scenario(&ScenarioSpec { delta: 0.0, ..disc.clone() }).is_err());
        assert!(build_scenario(&ScenarioSpec { blob_count: 0, ..disc.clone() }).is_err());
        assert!(build_scenario(&ScenarioSpec { blob_count: 3, ..pair() }).is_err());
        assert!("ring".parse::<ScenarioKind>().is_err());
        assert_eq!("two_patches".parse::<ScenarioKind>().unwrap(), ScenarioKind::TwoPatches);
    }

    #[test]
    fn two_patches_are_translates() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::TwoPatches,
            offset: 1.5,
            blob_count: 200,
            ..ScenarioSpec::default()
        };
        let ens = build_scenario(&spec).unwrap();
        let half = ens.len() / 2;
        assert_eq!(ens.len() % 2, 0);
        for (l, r) in ens.blobs()[..half].iter().zip(&ens.blobs()[half..]) {
            assert!((r.pos.x() - l.pos.x() - 3.0).abs() < 1e-12);
            assert_eq!(l.pos.y(), r.pos.y());
        }
    }
}
