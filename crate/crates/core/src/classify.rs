//! Limit regime of a shrinking family of triples: complete intersection
//! with parameter `m`, degenerate or generic maximal-square, or
//! inconclusive.

use alloc::vec::Vec;

use crate::cxgeom::{
    acute_angle, build_frame, canonicalize, chordal_distance, normalized_det, CanonicalFrame,
    PointTriple,
};
use crate::{Error, Result, C64};

/// Number of smallest-ε samples inspected by the direction and `m` tests.
pub const TAIL_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// `a2 = (eps, 0)`, `a3 = (rho, delta * rho)` with
    /// `rho = rho_coeff * eps^rho_exp` and `delta = delta_coeff * eps^delta_exp`.
    PowerLaw {
        rho_coeff: C64,
        rho_exp: f64,
        delta_coeff: C64,
        delta_exp: f64,
    },
    /// Explicit samples `(eps_k, triple_k)`, `eps_k` strictly decreasing.
    SampleTable(Vec<(f64, PointTriple)>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyWarning {
    /// `rho_exp < 1`: `|rho| <= eps / 2` fails for small `eps`.
    RhoExponentBelowOne { rho_exp: f64 },
    /// `rho_exp == 1` and `|rho_coeff| > 1/2`.
    RhoCoefficientTooLarge { rho_coeff: f64 },
    /// `delta_exp <= 0`: `delta` does not tend to 0.
    DeltaNotVanishing { delta_exp: f64 },
}

impl FamilySpec {
    pub fn power_law(rho_coeff: f64, rho_exp: f64, delta_coeff: f64, delta_exp: f64) -> Self {
        FamilySpec::PowerLaw {
            rho_coeff: C64::new(rho_coeff, 0.0),
            rho_exp,
            delta_coeff: C64::new(delta_coeff, 0.0),
            delta_exp,
        }
    }

    /// Checks hard invariants and returns soft ones as warnings.
    pub fn validate(&self) -> Result<Vec<FamilyWarning>> {
        let mut out = Vec::new();
        match self {
            FamilySpec::PowerLaw {
                rho_coeff,
                rho_exp,
                delta_coeff,
                delta_exp,
            } => {
                let finite = [rho_coeff.re, rho_coeff.im, *rho_exp, delta_coeff.re, delta_coeff.im, *delta_exp]
                    .iter()
                    .all(|x| x.is_finite());
                if !finite {
                    return Err(Error::InvalidParameter("non-finite family parameter"));
                }
                if rho_coeff.norm() == 0.0 || delta_coeff.norm() == 0.0 {
                    return Err(Error::InvalidParameter("zero family coefficient"));
                }
                if *rho_exp < 1.0 {
                    out.push(FamilyWarning::RhoExponentBelowOne { rho_exp: *rho_exp });
                } else if *rho_exp == 1.0 && rho_coeff.norm() > 0.5 {
                    out.push(FamilyWarning::RhoCoefficientTooLarge {
                        rho_coeff: rho_coeff.norm(),
                    });
                }
                if *delta_exp <= 0.0 {
                    out.push(FamilyWarning::DeltaNotVanishing {
                        delta_exp: *delta_exp,
                    });
                }
            }
            FamilySpec::SampleTable(rows) => {
                if rows.len() < 4 {
                    return Err(Error::InsufficientData("sample table needs at least 4 rows"));
                }
                let eps: Vec<f64> = rows.iter().map(|r| r.0).collect();
                check_schedule(&eps)?;
            }
        }
        Ok(out)
    }
}

fn check_schedule(eps: &[f64]) -> Result<()> {
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0 && *e < 0.5)) {
        return Err(Error::InvalidSchedule("every eps must lie in (0, 0.5)"));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSchedule("eps must be strictly decreasing"));
    }
    Ok(())
}

/// `n` points from `first` down to `last`, evenly spaced in `log eps`.
pub fn geometric_schedule(first: f64, last: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return Vec::from([first]);
    }
    let (a, b) = (libm::log10(first), libm::log10(last));
    (0..n)
        .map(|k| libm::pow(10.0, a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// One canonical frame per schedule point. For a `SampleTable` the table's
/// own `eps_k` are used and `eps_schedule` is ignored.
pub fn sample_family(spec: &FamilySpec, eps_schedule: &[f64]) -> Result<Vec<(f64, CanonicalFrame)>> {
    spec.validate()?;
    match spec {
        FamilySpec::PowerLaw {
            rho_coeff,
            rho_exp,
            delta_coeff,
            delta_exp,
        } => {
            check_schedule(eps_schedule)?;
            eps_schedule
                .iter()
                .map(|&eps| {
                    let rho = rho_coeff * libm::pow(eps, *rho_exp);
                    let delta = delta_coeff * libm::pow(eps, *delta_exp);
                    Ok((eps, CanonicalFrame::from_params(eps, rho, delta)?))
                })
                .collect()
        }
        FamilySpec::SampleTable(rows) => rows
            .iter()
            .map(|(eps, t)| {
                let [p, q, r] = t.points();
                let t = canonicalize(p, q, r)?;
                Ok((*eps, build_frame(&t)?))
            })
            .collect(),
    }
}

fn frame_triple(f: &CanonicalFrame) -> Result<PointTriple> {
    PointTriple::frame_aligned(f.eps, f.rho, f.delta)
}

/// `m_k = delta_k / (rho_k - eps_k)`.
pub fn m_sequence(frames: &[CanonicalFrame]) -> Result<Vec<C64>> {
    frames.iter().map(|f| f.m_value()).collect()
}

/// `crit_k = ||a2|| / theta_k`.
pub fn theta_criterion_sequence(frames: &[CanonicalFrame]) -> Result<Vec<f64>> {
    frames
        .iter()
        .map(|f| {
            let theta = acute_angle(&frame_triple(f)?)?;
            if theta == 0.0 {
                return Err(Error::CollinearTriple { det: 0.0 });
            }
            Ok(f.eps / theta)
        })
        .collect()
}

/// Relative difference between `crit_k` and `eps / asin(normalized_det)`.
pub fn theta_cross_check(frames: &[CanonicalFrame]) -> Result<Vec<f64>> {
    let crit = theta_criterion_sequence(frames)?;
    frames
        .iter()
        .zip(crit)
        .map(|(f, c)| {
            let alt = f.eps / libm::asin(normalized_det(&frame_triple(f)?)?);
            Ok((c - alt).abs() / c.abs())
        })
        .collect()
}

/// Tunable thresholds of the decision procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    /// `crit_k` trends to 0 when its slope against `log(1/eps)` is below this.
    pub slope_threshold: f64,
    /// ... and its last value is below the first divided by this.
    pub decade_drop: f64,
    /// Relative spread of `m_k` under which the sequence counts as converged.
    pub spread: f64,
    /// Chordal distance in CP^1 above which two directions count as distinct.
    pub chordal_gap: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            slope_threshold: -0.1,
            decade_drop: 10.0,
            spread: 1e-3,
            chordal_gap: 0.1,
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.slope_threshold.is_finite()
            && self.slope_threshold < 0.0
            && self.decade_drop > 1.0
            && self.decade_drop.is_finite()
            && self.spread > 0.0
            && self.spread < 1.0
            && self.chordal_gap > 0.0
            && self.chordal_gap < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("classification threshold out of range"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    CompleteIntersection { m: C64 },
    MaxSquareDegenerate,
    MaxSquareGeneric,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub eps: Vec<f64>,
    /// Empty when some sample has `rho == eps`.
    pub m: Vec<C64>,
    pub crit: Vec<f64>,
    pub crit_cross_check: Vec<f64>,
    /// Largest pairwise chordal distance between the three directions.
    pub direction_gaps: Vec<f64>,
    /// Largest movement of a direction class between consecutive samples.
    pub direction_moves: Vec<f64>,
    pub crit_slope: f64,
    pub crit_to_zero: bool,
    pub m_converges: bool,
    pub m_diverges: bool,
    pub m_extrapolated: Option<C64>,
    pub directions_split: bool,
    pub directions_converge: bool,
    /// Both the complete-intersection and the degenerate test fired.
    pub contradiction: bool,
    pub family_warnings: Vec<FamilyWarning>,
}

impl Evidence {
    /// `m` divergence agrees with `crit -> 0`; `None` for generic families
    /// where the equivalence does not apply.
    pub fn equivalence_holds(&self) -> Option<bool> {
        (!self.directions_split).then_some(self.crit_to_zero == self.m_diverges)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub regime: Regime,
    pub evidence: Evidence,
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Successive differences halve over the tail, or the whole sequence has
/// small relative spread.
fn m_converges(m: &[C64], spread_tol: f64) -> bool {
    if m.len() < 3 {
        return false;
    }
    let diffs: Vec<f64> = m.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let start = diffs.len().saturating_sub(TAIL_WINDOW + 1);
    let shrinking = diffs[start..].windows(2).all(|w| w[1] <= 0.5 * w[0]);
    let scale = m.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut spread = 0.0f64;
    for a in m {
        for b in m {
            spread = spread.max((a - b).norm());
        }
    }
    let relative = if scale == 0.0 { 0.0 } else { spread / scale };
    shrinking || relative < spread_tol
}

fn m_diverges(m: &[C64], factor: f64) -> bool {
    let tail = &m[m.len().saturating_sub(TAIL_WINDOW)..];
    if tail.len() < 2 {
        return false;
    }
    let growing = tail.windows(2).all(|w| w[1].norm() >= w[0].norm());
    growing && m[m.len() - 1].norm() >= factor * m[0].norm()
}

/// One Aitken delta-squared step on the last three samples.
fn aitken(m: &[C64]) -> Option<C64> {
    let n = m.len();
    if n < 3 {
        return m.last().copied();
    }
    let (a, b, c) = (m[n - 3], m[n - 2], m[n - 1]);
    let d1 = b - a;
    let d2 = c - b;
    let dd = d2 - d1;
    let scale = a.norm().max(b.norm()).max(c.norm());
    if dd.norm() <= 1e-14 * scale || dd.norm() == 0.0 {
        return Some(c);
    }
    Some(c - d2 * d2 / dd)
}

fn direction_classes(f: &CanonicalFrame) -> Result<[crate::cxgeom::Complex2; 3]> {
    Ok(frame_triple(f)?.directions())
}

pub fn classify(spec: &FamilySpec, eps_schedule: &[f64]) -> Result<Classification> {
    classify_with(spec, eps_schedule, &ClassifyConfig::default())
}

pub fn classify_with(spec: &FamilySpec, eps_schedule: &[f64], cfg: &ClassifyConfig) -> Result<Classification> {
    cfg.validate()?;
    let family_warnings = spec.validate()?;
    let samples = sample_family(spec, eps_schedule)?;
    let eps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if eps.len() < 4 {
        return Err(Error::InvalidSchedule("need at least 4 samples"));
    }
    if libm::log10(eps[0] / eps[eps.len() - 1]) < 3.0 - 1e-12 {
        return Err(Error::InvalidSchedule("samples must span at least 3 decades"));
    }
    let frames: Vec<CanonicalFrame> = samples.iter().map(|s| s.1).collect();

    let crit = theta_criterion_sequence(&frames)?;
    let crit_cross_check = theta_cross_check(&frames)?;
    let m = m_sequence(&frames).unwrap_or_default();

    let classes: Vec<[crate::cxgeom::Complex2; 3]> =
        frames.iter().map(direction_classes).collect::<Result<_>>()?;
    let direction_gaps: Vec<f64> = classes
        .iter()
        .map(|d| {
            chordal_distance(d[0], d[1])
                .max(chordal_distance(d[0], d[2]))
                .max(chordal_distance(d[1], d[2]))
        })
        .collect();
    let direction_moves: Vec<f64> = classes
        .windows(2)
        .map(|w| {
            w[1].iter()
                .map(|u| {
                    w[0].iter()
                        .map(|v| chordal_distance(*u, *v))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        })
        .collect();

    let tail = eps.len().saturating_sub(TAIL_WINDOW);
    let directions_split = direction_gaps[tail..].iter().all(|g| *g > cfg.chordal_gap);
    let moves_tail = &direction_moves[direction_moves.len().saturating_sub(TAIL_WINDOW)..];
    let directions_converge = moves_tail.iter().all(|d| *d <= cfg.spread)
        || moves_tail.windows(2).all(|w| w[1] <= 0.5 * w[0]);

    let xs: Vec<f64> = eps.iter().map(|e| -libm::log(*e)).collect();
    let ys: Vec<f64> = crit.iter().map(|c| libm::log(*c)).collect();
    let crit_slope = slope(&xs, &ys);
    let crit_to_zero =
        crit_slope < cfg.slope_threshold && crit[crit.len() - 1] < crit[0] / cfg.decade_drop;

    let m_conv = !m.is_empty() && m_converges(&m, cfg.spread);
    let m_div = !m.is_empty() && m_diverges(&m, cfg.decade_drop);
    let m_extrapolated = if m_conv { aitken(&m) } else { None };
    let contradiction = !directions_split && crit_to_zero && m_conv;

    let regime = if directions_split {
        Regime::MaxSquareGeneric
    } else if contradiction {
        Regime::Inconclusive
    } else if crit_to_zero {
        Regime::MaxSquareDegenerate
    } else if let Some(m) = m_extrapolated {
        Regime::CompleteIntersection { m }
    } else {
        Regime::Inconclusive
    };

    Ok(Classification {
        regime,
        evidence: Evidence {
            eps,
            m,
            crit,
            crit_cross_check,
            direction_gaps,
            direction_moves,
            crit_slope,
            crit_to_zero,
            m_converges: m_conv,
            m_diverges: m_div,
            m_extrapolated,
            directions_split,
            directions_converge,
            contradiction,
            family_warnings,
        },
    })
}
