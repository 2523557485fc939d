//! Sweep configuration: the JSON file format and its validated form.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use plurigreen_core::bipoly::MIN_RESOLUTION;
use plurigreen_core::classify::{geometric_schedule, FamilySpec};
use plurigreen_core::cxgeom::Complex2;

use crate::schema::{FamilyRecord, PointRecord};

pub const MAX_BUDGET: usize = 64;
pub const MAX_RESOLUTION: usize = 4096;
pub const MAX_WORKERS: usize = 256;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid family: {0}")]
    Family(#[from] plurigreen_core::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// Either an explicit list or `count` points evenly spaced in `log eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleRecord {
    List(Vec<f64>),
    Geometric(GeometricSchedule),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSchedule {
    pub first: f64,
    pub last: f64,
    pub count: usize,
}

impl ScheduleRecord {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ScheduleRecord::List(v) => v.clone(),
            ScheduleRecord::Geometric(g) => geometric_schedule(g.first, g.last, g.count),
        }
    }
}

/// `n x n` real points `(x, y)` with `x, y` evenly spaced in `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRecord {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridRecord {
    /// Row-major, `z1` outer.
    pub fn points(&self) -> Vec<Complex2> {
        let step = |i: usize| {
            if self.n == 1 {
                self.min
            } else {
                self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.push(Complex2::real(step(i), step(j)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Allowed excess of a lower bound over an upper bound.
    pub sandwich: f64,
    /// Liminf check: lower bound at the smallest eps against the
    /// maximal-square target.
    pub liminf_band: f64,
    /// Envelope and lower bound against the regime's limit value.
    pub target_band: f64,
    /// Closed-form two-point limit in the region `|z2| <= |z1|^2`.
    pub formula_band: f64,
    /// Fraction of points whose gap must shrink before the trend flag is
    /// raised.
    pub trend_soft: f64,
    /// Below this fraction the trend check fails.
    pub trend_hard: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sandwich: 1e-9,
            liminf_band: 0.05,
            target_band: 0.2,
            formula_band: 1e-3,
            trend_soft: 0.9,
            trend_hard: 0.5,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bands = [
            ("sandwich", self.sandwich),
            ("liminf_band", self.liminf_band),
            ("target_band", self.target_band),
            ("formula_band", self.formula_band),
        ];
        for (name, v) in bands {
            if !(v.is_finite() && (0.0..=10.0).contains(&v)) {
                return invalid(format!("tolerance {name} must lie in [0, 10], got {v}"));
            }
        }
        let fractions_ok = (0.0..=1.0).contains(&self.trend_soft)
            && (0.0..=1.0).contains(&self.trend_hard)
            && self.trend_hard <= self.trend_soft;
        if !fractions_ok {
            return invalid("trend fractions must satisfy 0 <= trend_hard <= trend_soft <= 1");
        }
        Ok(())
    }
}

/// Contents of a sweep config file. Every field except `family` may also
/// be given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub family: FamilyRecord,
    #[serde(default)]
    pub eps_schedule: Option<ScheduleRecord>,
    #[serde(default)]
    pub test_points: Vec<PointRecord>,
    /// Appended after `test_points`.
    #[serde(default)]
    pub grid: Option<GridRecord>,
    #[serde(default)]
    pub envelope_budget: Option<usize>,
    #[serde(default)]
    pub sup_resolution: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl SweepFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub family: FamilySpec,
    /// Ignored for sample tables, which carry their own `eps`.
    pub eps_schedule: Vec<f64>,
    pub test_points: Vec<Complex2>,
    pub envelope_budget: usize,
    pub sup_resolution: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl SweepConfig {
    pub fn new(family: FamilySpec, eps_schedule: Vec<f64>, test_points: Vec<Complex2>) -> Self {
        Self {
            family,
            eps_schedule,
            test_points,
            envelope_budget: 4,
            sup_resolution: plurigreen_core::bipoly::DEFAULT_RESOLUTION,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_file(f: &SweepFile) -> Result<Self, ConfigError> {
        let mut points: Vec<Complex2> = f.test_points.iter().map(|&p| p.into()).collect();
        if let Some(g) = &f.grid {
            if g.n == 0 || !(g.min.is_finite() && g.max.is_finite()) {
                return invalid("grid needs n >= 1 and finite bounds");
            }
            points.extend(g.points());
        }
        let mut cfg = Self::new(
            f.family.to_spec()?,
            f.eps_schedule.as_ref().map(ScheduleRecord::values).unwrap_or_default(),
            points,
        );
        if let Some(b) = f.envelope_budget {
            cfg.envelope_budget = b;
        }
        if let Some(r) = f.sup_resolution {
            cfg.sup_resolution = r;
        }
        if let Some(s) = f.seed {
            cfg.seed = s;
        }
        cfg.tolerances = f.tolerances;
        Ok(cfg)
    }

    /// The eps values the sweep will actually visit.
    pub fn effective_schedule(&self) -> Vec<f64> {
        match &self.family {
            FamilySpec::SampleTable(rows) => rows.iter().map(|r| r.0).collect(),
            FamilySpec::PowerLaw { .. } => self.eps_schedule.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.family.validate()?;
        let eps = self.effective_schedule();
        if eps.len() < 4 {
            return invalid(format!("schedule needs at least 4 values, got {}", eps.len()));
        }
        if eps.iter().any(|e| !(e.is_finite() && *e > 0.0 && *e < 0.5)) {
            return invalid("schedule values must lie in (0, 0.5)");
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return invalid("schedule must be strictly decreasing");
        }
        if eps[0] / eps[eps.len() - 1] < 1e3 * (1.0 - 1e-12) {
            return invalid("schedule must span at least 3 decades");
        }
        for (i, z) in self.test_points.iter().enumerate() {
            if !z.in_open_bidisk() {
                return invalid(format!("test point {i} is not in the open bidisk"));
            }
        }
        if !(1..=MAX_BUDGET).contains(&self.envelope_budget) {
            return invalid(format!("envelope_budget must lie in 1..={MAX_BUDGET}"));
        }
        if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&self.sup_resolution) {
            return invalid(format!("sup_resolution must lie in {MIN_RESOLUTION}..={MAX_RESOLUTION}"));
        }
        self.tolerances.validate()
    }
}

pub fn validate_workers(workers: usize) -> Result<(), ConfigError> {
    if (1..=MAX_WORKERS).contains(&workers) {
        Ok(())
    } else {
        invalid(format!("workers must lie in 1..={MAX_WORKERS}"))
    }
}
