//! Blob velocities by direct pairwise summation and explicit time stepping.
//!
//! Each blob moves with the velocity induced by all other blobs,
//! `dz_i/dt = sum_{j != i} G_j k_{delta_j}(z_i - z_j)`. The per-target sum always
//! runs over sources in blob order. Parallel execution only distributes targets,
//! so sequential and parallel runs are bit-identical.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{
    abs_first_moment, horizontal_center, regularized_energy, support_diameter, tail_profile,
    total_mass, DiagnosticsRecord, FieldError, VorticityEnsemble,
};
use crate::geometry::{kernel_fast, wrap_angle, CylinderPoint, KernelError, Velocity2};
use crate::par::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("ensemble has no blobs")]
    EmptyEnsemble,
    #[error("singular interaction: target {target} sits on unregularized blob {source_index}")]
    Singular { target: usize, source_index: usize },
    #[error("probe point ({x}, {y}) sits on unregularized blob {source_index}")]
    SingularProbe { x: f64, y: f64, source_index: usize },
    #[error("step at t = {t} failed in stage {stage}: target {target} sits on unregularized blob {source_index}")]
    StepFailed {
        t: f64,
        stage: usize,
        target: usize,
        source_index: usize,
    },
    #[error("observer aborted the run: {0}")]
    Observer(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
    Rk2,
}

impl std::str::FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rk4" => Ok(Integrator::Rk4),
            "rk2" => Ok(Integrator::Rk2),
            other => Err(format!("unknown integrator '{other}' (expected rk4 or rk2)")),
        }
    }
}

/// Where `sup |u1|` is sampled: `x_count` abscissae in `[x_min, x_max]`,
/// `y_count` equally spaced angles at each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub x_count: usize,
    pub y_count: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            x_count: 33,
            y_count: 32,
        }
    }
}

impl ProbeGrid {
    pub const MIN_Y_SAMPLES: usize = 16;

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::InvalidConfig(m.to_string()));
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_min > self.x_max {
            return bad("probe x-range must be finite with x_min <= x_max");
        }
        if self.x_count == 0 {
            return bad("probe x_count must be at least 1");
        }
        if self.y_count < Self::MIN_Y_SAMPLES {
            return bad("probe y_count must be at least 16");
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        if self.x_count == 1 {
            return vec![self.x_min];
        }
        let h = (self.x_max - self.x_min) / (self.x_count - 1) as f64;
        (0..self.x_count).map(|i| self.x_min + i as f64 * h).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.y_count)
            .map(|k| TAU * k as f64 / self.y_count as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub integrator: Integrator,
    pub tail_exponents: Vec<u32>,
    pub seed: u64,
    pub probe: ProbeGrid,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 1.0,
            output_every: 10,
            integrator: Integrator::Rk4,
            tail_exponents: (0..=6).collect(),
            seed: 0,
            probe: ProbeGrid::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be a positive finite number");
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad("t_end must be a non-negative finite number");
        }
        if self.output_every == 0 {
            return bad("output_every must be at least 1");
        }
        self.probe.validate()
    }

    /// Number of steps and the time of step `k`; the last step is shortened to land on `t_end`.
    fn time_grid(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Structure-of-arrays view of the sources.
struct Sources {
    circ: Vec<f64>,
    delta_sq: Vec<f64>,
}

impl Sources {
    fn of(ens: &VorticityEnsemble) -> Self {
        Self {
            circ: ens.blobs().iter().map(|b| b.circulation).collect(),
            delta_sq: ens.blobs().iter().map(|b| b.core_radius * b.core_radius).collect(),
        }
    }
}

/// Velocity at `(x, y)` from all sources except `exclude`; `Err(j)` names a singular source.
#[inline]
fn sum_velocity(
    src: &Sources,
    xs: &[f64],
    ys: &[f64],
    x: f64,
    y: f64,
    exclude: Option<usize>,
) -> Result<(f64, f64), usize> {
    let mut u1 = 0.0;
    let mut u2 = 0.0;
    for j in 0..xs.len() {
        if Some(j) == exclude {
            continue;
        }
        match kernel_fast(x - xs[j], y - ys[j], src.delta_sq[j]) {
            Some((k1, k2)) => {
                u1 += src.circ[j] * k1;
                u2 += src.circ[j] * k2;
            }
            None => return Err(j),
        }
    }
    Ok((u1, u2))
}

/// How target loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon over targets; identical to `Sequential` without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Above this many blobs the pair buffer is skipped and every pair is evaluated twice.
const PAIR_BUFFER_MAX: usize = 2048;

fn induced(
    src: &Sources,
    xs: &[f64],
    ys: &[f64],
    out: &mut [(f64, f64)],
    exec: Execution,
) -> Result<(), (usize, usize)> {
    let n = xs.len();
    if n > PAIR_BUFFER_MAX {
        let per_target = |i: usize| sum_velocity(src, xs, ys, xs[i], ys[i], Some(i)).map_err(|j| (i, j));
        return run_targets(n, out, exec, per_target);
    }
    // Lower triangle: row i holds k(z_i - z_j; delta_j) for j < i. The kernel is
    // exactly odd, so -k(z_j - z_i; delta_j) reproduces the upper entry bit for bit
    // whenever delta_i = delta_j; other pairs are evaluated directly.
    // Singular pairs are marked with NaN; finite inputs never produce NaN otherwise.
    let row = |i: usize| -> Vec<(f64, f64)> {
        let (xi, yi) = (xs[i], ys[i]);
        let mut r = Vec::with_capacity(i);
        for j in 0..i {
            r.push(kernel_fast(xi - xs[j], yi - ys[j], src.delta_sq[j]).unwrap_or((f64::NAN, f64::NAN)));
        }
        r
    };
    let rows: Vec<Vec<(f64, f64)>> = match exec {
        Execution::Sequential => (0..n).map(row).collect(),
        Execution::Parallel => (0..n).into_par_iter().map(row).collect(),
    };
    let per_target = |i: usize| {
        let mut u1 = 0.0;
        let mut u2 = 0.0;
        for j in 0..n {
            let (k1, k2) = if j < i {
                rows[i][j]
            } else if j == i {
                continue;
            } else if src.delta_sq[i] == src.delta_sq[j] {
                let (a, b) = rows[j][i];
                (-a, -b)
            } else {
                kernel_fast(xs[i] - xs[j], ys[i] - ys[j], src.delta_sq[j]).unwrap_or((f64::NAN, f64::NAN))
            };
            if k1.is_nan() {
                return Err((i, j));
            }
            u1 += src.circ[j] * k1;
            u2 += src.circ[j] * k2;
        }
        Ok((u1, u2))
    };
    run_targets(n, out, exec, per_target)
}

fn run_targets<F>(n: usize, out: &mut [(f64, f64)], exec: Execution, per_target: F) -> Result<(), (usize, usize)>
where
    F: Fn(usize) -> Result<(f64, f64), (usize, usize)> + Sync + Send,
{
    match exec {
        Execution::Sequential => {
            for i in 0..n {
                out[i] = per_target(i)?;
            }
        }
        Execution::Parallel => {
            let results: Vec<Result<(f64, f64), (usize, usize)>> =
                (0..n).into_par_iter().map(per_target).collect();
            for (slot, r) in out.iter_mut().zip(results) {
                *slot = r?;
            }
        }
    }
    Ok(())
}

/// `u(z) = sum_{j != exclude} G_j k_{delta_j}(z - z_j)`, summed in blob order.
pub fn velocity_at(
    ens: &VorticityEnsemble,
    z: CylinderPoint,
    exclude: Option<usize>,
) -> Result<Velocity2, DynamicsError> {
    let src = Sources::of(ens);
    let xs: Vec<f64> = ens.blobs().iter().map(|b| b.pos.x()).collect();
    let ys: Vec<f64> = ens.blobs().iter().map(|b| b.pos.y()).collect();
    sum_velocity(&src, &xs, &ys, z.x(), z.y(), exclude)
        .map(|(u1, u2)| Velocity2::new(u1, u2))
        .map_err(|source_index| DynamicsError::SingularProbe {
            x: z.x(),
            y: z.y(),
            source_index,
        })
}

/// Velocity of every blob induced by all the others.
pub fn self_induced_velocities(ens: &VorticityEnsemble) -> Result<Vec<Velocity2>, DynamicsError> {
    self_induced_velocities_with(ens, Execution::default())
}

pub fn self_induced_velocities_with(
    ens: &VorticityEnsemble,
    exec: Execution,
) -> Result<Vec<Velocity2>, DynamicsError> {
    let src = Sources::of(ens);
    let xs: Vec<f64> = ens.blobs().iter().map(|b| b.pos.x()).collect();
    let ys: Vec<f64> = ens.blobs().iter().map(|b| b.pos.y()).collect();
    let mut out = vec![(0.0, 0.0); xs.len()];
    induced(&src, &xs, &ys, &mut out, exec)
        .map_err(|(target, source_index)| DynamicsError::Singular { target, source_index })?;
    Ok(out.into_iter().map(|(u1, u2)| Velocity2::new(u1, u2)).collect())
}

/// Scratch buffers for one explicit step.
struct Stepper<'a> {
    src: Sources,
    exec: Execution,
    x0: &'a [f64],
    y0: &'a [f64],
    xs: Vec<f64>,
    ys: Vec<f64>,
    k: Vec<(f64, f64)>,
    acc: Vec<(f64, f64)>,
}

impl<'a> Stepper<'a> {
    fn new(ens: &VorticityEnsemble, x0: &'a [f64], y0: &'a [f64], exec: Execution) -> Self {
        let n = x0.len();
        Self {
            src: Sources::of(ens),
            exec,
            x0,
            y0,
            xs: x0.to_vec(),
            ys: y0.to_vec(),
            k: vec![(0.0, 0.0); n],
            acc: vec![(0.0, 0.0); n],
        }
    }

    /// Evaluates velocities at the current stage positions into `k`.
    fn eval(&mut self, stage: usize, t: f64) -> Result<(), DynamicsError> {
        induced(&self.src, &self.xs, &self.ys, &mut self.k, self.exec).map_err(|(target, source_index)| {
            DynamicsError::StepFailed {
                t,
                stage,
                target,
                source_index,
            }
        })
    }

    /// Stage positions `z0 + h k`.
    fn advance_from_start(&mut self, h: f64) {
        for i in 0..self.xs.len() {
            self.xs[i] = self.x0[i] + h * self.k[i].0;
            self.ys[i] = self.y0[i] + h * self.k[i].1;
        }
    }

    fn accumulate(&mut self, weight: f64) {
        for (a, k) in self.acc.iter_mut().zip(&self.k) {
            a.0 += weight * k.0;
            a.1 += weight * k.1;
        }
    }

    fn run(mut self, dt: f64, integrator: Integrator, t: f64) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
        match integrator {
            Integrator::Rk4 => {
                self.eval(1, t)?;
                self.accumulate(1.0);
                self.advance_from_start(0.5 * dt);
                self.eval(2, t)?;
                self.accumulate(2.0);
                self.advance_from_start(0.5 * dt);
                self.eval(3, t)?;
                self.accumulate(2.0);
                self.advance_from_start(dt);
                self.eval(4, t)?;
                self.accumulate(1.0);
                let h = dt / 6.0;
                for i in 0..self.xs.len() {
                    self.xs[i] = self.x0[i] + h * self.acc[i].0;
                    self.ys[i] = wrap_angle(self.y0[i] + h * self.acc[i].1);
                }
            }
            Integrator::Rk2 => {
                self.eval(1, t)?;
                self.advance_from_start(0.5 * dt);
                self.eval(2, t)?;
                for i in 0..self.xs.len() {
                    self.xs[i] = self.x0[i] + dt * self.k[i].0;
                    self.ys[i] = wrap_angle(self.y0[i] + dt * self.k[i].1);
                }
            }
        }
        Ok((self.xs, self.ys))
    }
}

fn step_at(
    ens: &VorticityEnsemble,
    dt: f64,
    integrator: Integrator,
    t: f64,
    exec: Execution,
) -> Result<VorticityEnsemble, DynamicsError> {
    if !(dt > 0.0) {
        return Err(DynamicsError::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let x0: Vec<f64> = ens.blobs().iter().map(|b| b.pos.x()).collect();
    let y0: Vec<f64> = ens.blobs().iter().map(|b| b.pos.y()).collect();
    let (xs, ys) = Stepper::new(ens, &x0, &y0, exec).run(dt, integrator, t)?;
    Ok(ens.with_positions(&xs, &ys)?)
}

/// One explicit step of all blob positions. Circulations and cores are untouched;
/// `y` is wrapped once at the end of the step.
pub fn step(
    ens: &VorticityEnsemble,
    dt: f64,
    integrator: Integrator,
) -> Result<VorticityEnsemble, DynamicsError> {
    step_at(ens, dt, integrator, 0.0, Execution::default())
}

pub fn step_with(
    ens: &VorticityEnsemble,
    dt: f64,
    integrator: Integrator,
    exec: Execution,
) -> Result<VorticityEnsemble, DynamicsError> {
    step_at(ens, dt, integrator, 0.0, exec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupProfile {
    /// `(x, max_y |u1(x, y)|)` per probe abscissa.
    pub points: Vec<(f64, f64)>,
    pub global_max: f64,
}

/// `max_y |u1|` along each probe abscissa. Sources that coincide with a probe
/// point and carry no core are skipped.
pub fn sup_u1_profile(ens: &VorticityEnsemble, probe: &ProbeGrid) -> Result<SupProfile, DynamicsError> {
    probe.validate()?;
    let src = Sources::of(ens);
    let xs: Vec<f64> = ens.blobs().iter().map(|b| b.pos.x()).collect();
    let ys: Vec<f64> = ens.blobs().iter().map(|b| b.pos.y()).collect();
    let probe_ys = probe.ys();
    let points: Vec<(f64, f64)> = probe
        .xs()
        .into_par_iter()
        .map(|px| {
            let mut best = 0.0f64;
            for &py in &probe_ys {
                let mut u1 = 0.0;
                for j in 0..xs.len() {
                    if let Some((k1, _)) = kernel_fast(px - xs[j], py - ys[j], src.delta_sq[j]) {
                        u1 += src.circ[j] * k1;
                    }
                }
                best = best.max(u1.abs());
            }
            (px, best)
        })
        .collect();
    let global_max = points.iter().fold(0.0f64, |m, p| m.max(p.1));
    Ok(SupProfile { points, global_max })
}

/// Snapshot of every functional at time `t`. The energy column is NaN when some
/// blob has zero core radius, where the self-energy diverges.
pub fn diagnose(ens: &VorticityEnsemble, t: f64, cfg: &SimConfig) -> Result<DiagnosticsRecord, DynamicsError> {
    let energy = match regularized_energy(ens) {
        Ok(e) => e,
        Err(FieldError::DiagonalSingular { .. }) => f64::NAN,
        Err(e) => return Err(e.into()),
    };
    let diameter = match support_diameter(ens) {
        Ok(d) => d,
        Err(FieldError::EmptySupport) => 0.0,
        Err(e) => return Err(e.into()),
    };
    Ok(DiagnosticsRecord {
        t,
        mass: total_mass(ens),
        h_center: horizontal_center(ens),
        energy,
        abs_moment: abs_first_moment(ens),
        diameter,
        sup_u1: sup_u1_profile(ens, &cfg.probe)?.global_max,
        tails: tail_profile(ens, &cfg.tail_exponents),
    })
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: VorticityEnsemble,
}

/// A run that stopped early; `records` holds everything emitted before the failure.
#[derive(Debug, Clone)]
pub struct SimulationAbort {
    pub records: Vec<DiagnosticsRecord>,
    pub last_state: VorticityEnsemble,
    pub error: DynamicsError,
}

/// Integrates from `t = 0` to `t_end`, recording diagnostics at `t = 0`, every
/// `output_every` steps, and at `t_end`.
pub fn simulate(ens0: &VorticityEnsemble, cfg: &SimConfig) -> Result<Trajectory, SimulationAbort> {
    let mut records = Vec::new();
    let result = simulate_with(ens0, cfg, |rec, _| {
        records.push(rec.clone());
        Ok(())
    });
    match result {
        Ok(final_state) => Ok(Trajectory { records, final_state }),
        Err((last_state, error)) => Err(SimulationAbort {
            records,
            last_state,
            error,
        }),
    }
}

/// Streaming form of [`simulate`]: `observe` sees each record together with the
/// ensemble it was computed from, as soon as it exists.
pub fn simulate_with<F>(
    ens0: &VorticityEnsemble,
    cfg: &SimConfig,
    mut observe: F,
) -> Result<VorticityEnsemble, (VorticityEnsemble, DynamicsError)>
where
    F: FnMut(&DiagnosticsRecord, &VorticityEnsemble) -> Result<(), String>,
{
    if let Err(e) = cfg.validate() {
        return Err((ens0.clone(), e));
    }
    if ens0.is_empty() {
        return Err((ens0.clone(), DynamicsError::EmptyEnsemble));
    }
    let exec = Execution::default();
    let n_steps = cfg.time_grid();
    let time_of = |k: usize| if k == n_steps { cfg.t_end } else { k as f64 * cfg.dt };

    let mut emit = |ens: &VorticityEnsemble, t: f64| -> Result<(), DynamicsError> {
        let rec = diagnose(ens, t, cfg)?;
        observe(&rec, ens).map_err(DynamicsError::Observer)
    };

    let mut state = ens0.clone();
    if let Err(e) = emit(&state, 0.0) {
        return Err((state, e));
    }
    for k in 0..n_steps {
        let t = time_of(k);
        let dt = time_of(k + 1) - t;
        state = match step_at(&state, dt, cfg.integrator, t, exec) {
            Ok(s) => s,
            Err(e) => return Err((state, e)),
        };
        let done = k + 1;
        if done % cfg.output_every == 0 || done == n_steps {
            if let Err(e) = emit(&state, time_of(done)) {
                return Err((state, e));
            }
        }
    }
    Ok(state)
}
