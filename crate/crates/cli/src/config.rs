//! Key-value run configuration.
//!
//! One `key = value` pair per line. `#` starts a comment, blank lines are
//! ignored and every key may appear at most once. Unknown keys are errors.

use std::fmt;
use std::path::Path;

use cylvort::dynamics::{Integrator, ProbeGrid, SimConfig};
use cylvort::scenario::{ScenarioKind, ScenarioSpec};
use serde::Serialize;

/// A configuration problem, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: key '{k}': {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key '{k}': {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: &[(&str, &str)] = &[
    ("scenario", "disc_patch | two_patches | random_cloud | vortex_pair"),
    ("center_x", "horizontal center of the scenario"),
    ("center_y", "vertical center, in [0, 2pi)"),
    ("radius", "patch radius, below pi"),
    ("offset", "distance of each pair member or patch center from center_x"),
    ("blob_count", "number of blobs (approximate for patches)"),
    ("delta", "blob core radius; 0 only for vortex_pair"),
    ("circulation_scale", "vorticity level, total circulation or per-vortex circulation"),
    ("nonneg", "true | false; nonneg ensembles are recentered to h = 0"),
    ("seed", "seed for random_cloud"),
    ("dt", "time step"),
    ("t_end", "final time"),
    ("output_every", "steps between diagnostics rows"),
    ("integrator", "rk4 | rk2"),
    ("tail_exponents", "comma-separated n for the tail columns f_n"),
    ("probe_x_min", "left end of the sup|u1| probe grid"),
    ("probe_x_max", "right end of the sup|u1| probe grid"),
    ("probe_x_count", "probe abscissae"),
    ("probe_y_count", "probe ordinates per abscissa"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub sim: SimConfig,
    /// Entries in file order, as written.
    pub entries: Vec<(String, String)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSpec::default(),
            sim: SimConfig::default(),
            entries: Vec::new(),
        }
    }
}

fn err(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        key: Some(key.to_string()),
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str, what: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| err(line, key, format!("expected {what}, got '{v}'")))
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(err(line, key, format!("expected true or false, got '{v}'"))),
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut first_line = std::collections::HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError {
                line: Some(line),
                key: None,
                message: format!("expected 'key = value', got '{content}'"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError {
                line: Some(line),
                key: None,
                message: "missing key before '='".into(),
            });
        }
        if let Some(prev) = first_line.insert(key.to_string(), line) {
            return Err(err(line, key, format!("duplicate key (first set on line {prev})")));
        }
        apply(&mut cfg, line, key, value)?;
        cfg.entries.push((key.to_string(), value.to_string()));
    }
    cfg.scenario.validate().map_err(|e| ConfigError {
        line: None,
        key: None,
        message: e.to_string(),
    })?;
    cfg.sim.validate().map_err(|e| ConfigError {
        line: None,
        key: None,
        message: e.to_string(),
    })?;
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, line: usize, key: &str, v: &str) -> Result<(), ConfigError> {
    let s = &mut cfg.scenario;
    let m = &mut cfg.sim;
    let real = |v: &str| num::<f64>(line, key, v, "a number");
    match key {
        "scenario" => s.kind = v.parse::<ScenarioKind>().map_err(|e| err(line, key, e.to_string()))?,
        "center_x" => s.center_x = real(v)?,
        "center_y" => s.center_y = real(v)?,
        "radius" => s.radius = real(v)?,
        "offset" => s.offset = real(v)?,
        "blob_count" => s.blob_count = num(line, key, v, "a non-negative integer")?,
        "delta" => s.delta = real(v)?,
        "circulation_scale" => s.circulation_scale = real(v)?,
        "nonneg" => s.nonneg = boolean(line, key, v)?,
        "seed" => {
            let seed = num(line, key, v, "a non-negative integer")?;
            s.seed = seed;
            m.seed = seed;
        }
        "dt" => m.dt = real(v)?,
        "t_end" => m.t_end = real(v)?,
        "output_every" => m.output_every = num(line, key, v, "a positive integer")?,
        "integrator" => m.integrator = v.parse::<Integrator>().map_err(|e| err(line, key, e.to_string()))?,
        "tail_exponents" => {
            m.tail_exponents = if v.is_empty() {
                Vec::new()
            } else {
                v.split(',')
                    .map(|p| num(line, key, p.trim(), "a comma-separated list of non-negative integers"))
                    .collect::<Result<_, _>>()?
            }
        }
        "probe_x_min" => m.probe.x_min = real(v)?,
        "probe_x_max" => m.probe.x_max = real(v)?,
        "probe_x_count" => m.probe.x_count = num(line, key, v, "a positive integer")?,
        "probe_y_count" => {
            m.probe.y_count = num(line, key, v, "a positive integer")?;
            if m.probe.y_count < ProbeGrid::MIN_Y_SAMPLES {
                return Err(err(
                    line,
                    key,
                    format!("needs at least {} samples", ProbeGrid::MIN_Y_SAMPLES),
                ));
            }
        }
        _ => return Err(err(line, key, "unknown key")),
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse(&text)
}
