//! eps-sweeps over a family: bounds on a grid of test points, then
//! convergence diagnostics derived from the stored rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use plurigreen_core::classify::{classify, sample_family, Classification, Regime};
use plurigreen_core::cxgeom::{CanonicalFrame, Complex2};
use plurigreen_core::green::{exact_limit_for, BoundKind, GreenConfig, GreenContext, PolyLabel, SANDWICH_TOL};

use crate::config::{validate_workers, ConfigError, SweepConfig, Tolerances};
use crate::schema::{PointRecord, Real};

/// Rows closer than this to a pole are marked instead of evaluated.
pub const POLE_GUARD: f64 = 10.0 * f64::EPSILON;

/// Slack for the "non-increasing" comparisons of the trend checks.
pub const TREND_SLACK: f64 = 1e-9;

/// The three-halves target is checked when `log |delta| / log eps`, fitted
/// linearly against `1 / |log eps|` over the tail, extrapolates below this
/// and does not grow over the tail.
pub const DELTA_RATIO_LIMIT: f64 = 0.1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(#[from] plurigreen_core::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Exact,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub value: f64,
    pub kind: TargetKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowBounds {
    pub lower: f64,
    pub lower_label: PolyLabel,
    pub upper_two_point: f64,
    pub upper_envelope: f64,
    /// The envelope came from a validated disk rather than the two-point
    /// formula.
    pub envelope_from_disk: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Evaluated { bounds: RowBounds, target: Option<Target> },
    NearPole { distance: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub eps_index: usize,
    pub point_index: usize,
    pub eps: f64,
    pub z: Complex2,
    pub outcome: RowOutcome,
}

impl Row {
    pub fn bounds(&self) -> Option<&RowBounds> {
        match &self.outcome {
            RowOutcome::Evaluated { bounds, .. } => Some(bounds),
            _ => None,
        }
    }

    pub fn target(&self) -> Option<Target> {
        match &self.outcome {
            RowOutcome::Evaluated { target, .. } => *target,
            _ => None,
        }
    }

    /// `upper_envelope - exact_or_reference`.
    pub fn gap(&self) -> Option<f64> {
        Some(self.bounds()?.upper_envelope - self.target()?.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub frames: Vec<(f64, CanonicalFrame)>,
    pub classification: Classification,
    /// Ordered by `(eps_index, point_index)`.
    pub rows: Vec<Row>,
}

impl SweepReport {
    pub fn schedule(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.0).collect()
    }

    /// `log |delta_k| / log eps_k` per schedule point.
    pub fn delta_log_ratios(&self) -> Vec<f64> {
        self.frames
            .iter()
            .map(|(eps, f)| f.delta.norm().ln() / eps.ln())
            .collect()
    }

    pub fn rows_for_point(&self, point_index: usize) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.point_index == point_index)
    }
}

fn evaluate_row(ctx: &GreenContext, regime: &Regime, z: Complex2) -> RowOutcome {
    let distance = ctx
        .poles()
        .iter()
        .map(|a| (z - *a).norm())
        .fold(f64::INFINITY, f64::min);
    if distance < POLE_GUARD {
        return RowOutcome::NearPole { distance };
    }
    let eval = || -> plurigreen_core::Result<RowBounds> {
        let lower = ctx.lower_bound_best(z)?;
        let two = ctx.upper_bound_two_point(z)?;
        let env = ctx.upper_bound_disk_envelope(z)?;
        let lower_label = match lower.certificate {
            plurigreen_core::green::Certificate::Polynomial { label, .. } => label,
            _ => PolyLabel::Custom,
        };
        let envelope_from_disk = matches!(env.certificate, plurigreen_core::green::Certificate::Disk(_));
        if lower.value > two.value + SANDWICH_TOL {
            return Err(plurigreen_core::Error::SandwichViolation {
                lower: lower.value,
                upper: two.value,
            });
        }
        Ok(RowBounds {
            lower: lower.value,
            lower_label,
            upper_two_point: two.value,
            upper_envelope: env.value,
            envelope_from_disk,
        })
    };
    match eval() {
        Ok(bounds) => {
            let target = exact_limit_for(z, regime).ok().map(|b| Target {
                value: b.value,
                kind: if b.kind == BoundKind::ExactLimit {
                    TargetKind::Exact
                } else {
                    TargetKind::Reference
                },
            });
            RowOutcome::Evaluated { bounds, target }
        }
        Err(e) => RowOutcome::Failed(e.to_string()),
    }
}

/// Runs a sweep on `workers` threads. Rows do not depend on the worker
/// count.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepReport, HarnessError> {
    cfg.validate()?;
    validate_workers(workers)?;
    let frames = sample_family(&cfg.family, &cfg.eps_schedule)?;
    let classification = classify(&cfg.family, &cfg.eps_schedule)?;
    let regime = classification.regime;

    let mut green = GreenConfig {
        sup_resolution: cfg.sup_resolution,
        ..GreenConfig::default()
    };
    green.envelope.budget = cfg.envelope_budget;
    green.envelope.seed = cfg.seed;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let n_points = cfg.test_points.len();
    let rows = pool.install(|| {
        let contexts: Vec<Result<GreenContext, String>> = frames
            .par_iter()
            .map(|(_, f)| GreenContext::new(*f, green).map_err(|e| e.to_string()))
            .collect();
        (0..frames.len() * n_points)
            .into_par_iter()
            .map(|idx| {
                let (eps_index, point_index) = (idx / n_points, idx % n_points);
                let z = cfg.test_points[point_index];
                let outcome = match &contexts[eps_index] {
                    Ok(ctx) => evaluate_row(ctx, &regime, z),
                    Err(e) => RowOutcome::Failed(e.clone()),
                };
                Row {
                    eps_index,
                    point_index,
                    eps: frames[eps_index].0,
                    z,
                    outcome,
                }
            })
            .collect::<Vec<_>>()
    });
    for r in &rows {
        if let RowOutcome::Failed(e) = &r.outcome {
            log::warn!("row (eps #{}, point #{}) failed: {e}", r.eps_index, r.point_index);
        }
    }
    Ok(SweepReport {
        config: cfg.clone(),
        frames,
        classification,
        rows,
    })
}

/// One thresholded comparison, kept with its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub value: Real,
    pub bound: Real,
    /// `value >= bound` when set, `value <= bound` otherwise.
    pub at_least: bool,
    pub passed: bool,
}

impl Check {
    fn at_least(value: f64, bound: f64) -> Self {
        Self {
            value: Real(value),
            bound: Real(bound),
            at_least: true,
            passed: value >= bound,
        }
    }

    fn at_most(value: f64, bound: f64) -> Self {
        Self {
            value: Real(value),
            bound: Real(bound),
            at_least: false,
            passed: value <= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDiagnostics {
    pub point_index: usize,
    pub z: PointRecord,
    /// Smallest-eps lower bound against `max(2 log|z1|, 3/2 log|z2|)`.
    pub liminf: Option<Check>,
    /// Lower bound against the limit value (complete-intersection case).
    pub target_lower: Option<Check>,
    /// Envelope against the limit value, or against the three-halves value
    /// for degenerate families satisfying the delta hypothesis.
    pub target_upper: Option<Check>,
    /// `|upper_envelope - exact|` over the last three schedule points.
    pub gap_tail: Vec<Real>,
    pub gap_shrinks: Option<bool>,
    /// Two-point bound against `2 log|z1|` where `|z2| <= |z1|^2`.
    pub region: Option<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendStatus {
    Pass,
    /// Below the soft fraction but above the hard one.
    Flagged,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub points: Vec<PointDiagnostics>,
    pub trend_fraction: Option<Real>,
    pub trend_status: TrendStatus,
    /// Whether `log|delta| / log eps -> 0` looks plausible; only evaluated
    /// for degenerate families.
    pub delta_hypothesis: Option<bool>,
    pub rows_evaluated: usize,
    pub rows_near_pole: usize,
    pub rows_failed: usize,
    pub passed: bool,
}

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + TREND_SLACK)
}

fn log(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// Power laws `delta ~ eps^e` extrapolate to `e`; slower decay such as
/// `delta ~ 1 / log(1/eps)^2` extrapolates to about 0.
pub fn delta_ratio_intercept(eps: &[f64], ratios: &[f64]) -> f64 {
    let from = ratios.len().saturating_sub(3);
    let u: Vec<f64> = eps[from..].iter().map(|e| 1.0 / e.ln().abs()).collect();
    let r: Vec<f64> = ratios[from..].iter().map(|x| x.abs()).collect();
    let n = u.len() as f64;
    let (mu, mr) = (u.iter().sum::<f64>() / n, r.iter().sum::<f64>() / n);
    let suu: f64 = u.iter().map(|x| (x - mu) * (x - mu)).sum();
    if suu == 0.0 {
        return mr;
    }
    let sur: f64 = u.iter().zip(&r).map(|(x, y)| (x - mu) * (y - mr)).sum();
    mr - sur / suu * mu
}

fn delta_hypothesis(eps: &[f64], ratios: &[f64]) -> bool {
    let tail: Vec<f64> = ratios[ratios.len().saturating_sub(3)..].iter().map(|r| r.abs()).collect();
    non_increasing(&tail) && delta_ratio_intercept(eps, ratios) < DELTA_RATIO_LIMIT
}

fn point_diagnostics(
    r: &SweepReport,
    point_index: usize,
    tol: &Tolerances,
    delta_ok: Option<bool>,
) -> PointDiagnostics {
    let z = r.config.test_points[point_index];
    let rows: Vec<&Row> = r.rows_for_point(point_index).collect();
    let last = rows.last().and_then(|row| row.bounds().map(|b| (b, row.target())));
    let (a1, a2) = (z.c1.norm(), z.c2.norm());

    let mut d = PointDiagnostics {
        point_index,
        z: z.into(),
        liminf: None,
        target_lower: None,
        target_upper: None,
        gap_tail: Vec::new(),
        gap_shrinks: None,
        region: None,
        passed: false,
    };
    let regime = r.classification.regime;
    if let Some((b, target)) = last {
        let liminf_target = (2.0 * log(a1)).max(1.5 * log(a2));
        d.liminf = Some(Check::at_least(b.lower, liminf_target - tol.liminf_band));
        if a2 <= a1 * a1 {
            d.region = Some(Check::at_most(
                (b.upper_two_point - 2.0 * log(a1)).abs(),
                tol.formula_band,
            ));
        }
        match (regime, target) {
            (Regime::CompleteIntersection { .. }, Some(t)) => {
                d.target_lower = Some(Check::at_most(b.lower, t.value + tol.target_band));
                d.target_upper = Some(Check::at_least(b.upper_envelope, t.value - tol.target_band));
            }
            (Regime::MaxSquareDegenerate, _) if delta_ok == Some(true) => {
                let three_halves = 1.5 * log(a1.max(a2));
                d.target_upper = Some(Check::at_most(b.upper_envelope, three_halves + tol.target_band));
            }
            _ => {}
        }
    }
    if matches!(regime, Regime::CompleteIntersection { .. }) {
        let tail = &rows[rows.len().saturating_sub(3)..];
        let gaps: Option<Vec<f64>> = tail.iter().map(|row| row.gap().map(f64::abs)).collect();
        if let Some(g) = gaps {
            d.gap_shrinks = Some(non_increasing(&g));
            d.gap_tail = g.into_iter().map(Real).collect();
        } else {
            d.gap_shrinks = Some(false);
        }
    }
    let checks = [d.liminf, d.target_lower, d.target_upper, d.region];
    d.passed = last.is_some() && checks.iter().flatten().all(|c| c.passed);
    d
}

/// Checks every test point against the theoretical targets of the
/// classified regime. All flags are recomputed from the stored rows.
pub fn convergence_diagnostics(r: &SweepReport) -> plurigreen_core::Result<Diagnostics> {
    if r.frames.len() < 4 {
        return Err(plurigreen_core::Error::InsufficientData(
            "diagnostics need at least 4 eps values per point",
        ));
    }
    let tol = &r.config.tolerances;
    let delta_ok = matches!(r.classification.regime, Regime::MaxSquareDegenerate)
        .then(|| delta_hypothesis(&r.schedule(), &r.delta_log_ratios()));
    let points: Vec<PointDiagnostics> = (0..r.config.test_points.len())
        .map(|i| point_diagnostics(r, i, tol, delta_ok))
        .collect();

    let is_ci = matches!(r.classification.regime, Regime::CompleteIntersection { .. });
    let (trend_fraction, trend_status) = if is_ci && !points.is_empty() {
        let shrinking = points.iter().filter(|p| p.gap_shrinks == Some(true)).count();
        let frac = shrinking as f64 / points.len() as f64;
        let status = if frac >= tol.trend_soft {
            TrendStatus::Pass
        } else if frac >= tol.trend_hard {
            TrendStatus::Flagged
        } else {
            TrendStatus::Fail
        };
        (Some(Real(frac)), status)
    } else {
        (None, TrendStatus::NotApplicable)
    };

    let count = |f: fn(&RowOutcome) -> bool| r.rows.iter().filter(|row| f(&row.outcome)).count();
    let rows_evaluated = count(|o| matches!(o, RowOutcome::Evaluated { .. }));
    let rows_near_pole = count(|o| matches!(o, RowOutcome::NearPole { .. }));
    let rows_failed = count(|o| matches!(o, RowOutcome::Failed(_)));
    let passed = rows_failed == 0 && trend_status != TrendStatus::Fail && points.iter().all(|p| p.passed);
    Ok(Diagnostics {
        points,
        trend_fraction,
        trend_status,
        delta_hypothesis: delta_ok,
        rows_evaluated,
        rows_near_pole,
        rows_failed,
        passed,
    })
}
