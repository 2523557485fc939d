//! Certified lower and upper bounds for the three-pole Green function of
//! the bidisk, and the closed-form limit values.
//!
//! All evaluators work in frame coordinates: the poles are `(0, 0)`,
//! `(eps, 0)` and `(rho, delta * rho)`.

pub mod disk;

use alloc::vec::Vec;

use crate::bipoly::{sup_norm_bidisk, BiPoly, SupNormResult, DEFAULT_RESOLUTION};
use crate::classify::{Classification, Regime};
use crate::cxgeom::{CanonicalFrame, Complex2};
use crate::ideals::{line_product, q_generators};
use crate::{Error, Result, C64};

pub use disk::{DiskCandidate, DiskFamily, DiskMap, EnvelopeConfig};

/// Slack allowed between a lower and an upper bound before it is treated
/// as a contradiction.
pub const SANDWICH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
    ExactLimit,
    ReferenceValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyLabel {
    Q1,
    Q2,
    Q3,
    LineProduct,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Polynomial {
        label: PolyLabel,
        poly: BiPoly,
        order: u32,
        norm: SupNormResult,
    },
    Disk(DiskCandidate),
    /// `max(G_D(z1; {0, eps}), log |z2|)`; `fallback` marks use in place of
    /// an envelope that found no admissible disk.
    TwoPoint { eps: f64, fallback: bool },
    /// `max(log |z2 - m z1^2|, 3 log |z1|)`.
    LimitFormula { m: C64 },
    /// Both reference values for the maximal-square regimes. The second
    /// is a limit only under `log |delta| / log |eps| -> 0`.
    Reference {
        max_square: f64,
        three_halves: f64,
        hypothesis: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenBound {
    pub kind: BoundKind,
    /// `-inf` is a legitimate value (at poles).
    pub value: f64,
    pub certificate: Certificate,
}

fn check_bidisk(z: Complex2) -> Result<()> {
    if z.in_open_bidisk() {
        Ok(())
    } else {
        Err(Error::OutOfDomain("z must lie in the open bidisk"))
    }
}

/// `log |(zeta - pole) / (1 - conj(pole) zeta)|`, the Green function of the
/// unit disk.
pub fn disk_green(pole: C64, zeta: C64) -> Result<f64> {
    if pole.norm() >= 1.0 || zeta.norm() >= 1.0 {
        return Err(Error::OutOfDomain("disk Green function needs |pole|, |zeta| < 1"));
    }
    if zeta == pole {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(libm::log(((zeta - pole) / (C64::new(1.0, 0.0) - pole.conj() * zeta)).norm()))
}

/// `(1/order) log(|p(z)| / sup)` with `sup = norm.value + norm.uncertainty`.
pub fn lower_bound_poly(z: Complex2, p: &BiPoly, order: u32, norm: &SupNormResult) -> Result<GreenBound> {
    lower_bound_labelled(z, PolyLabel::Custom, p, order, norm)
}

fn lower_bound_labelled(
    z: Complex2,
    label: PolyLabel,
    p: &BiPoly,
    order: u32,
    norm: &SupNormResult,
) -> Result<GreenBound> {
    if order == 0 {
        return Err(Error::InvalidParameter("vanishing order must be positive"));
    }
    if norm.value.is_nan() || norm.value <= 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let at = p.eval(z).norm();
    let value = if at == 0.0 {
        f64::NEG_INFINITY
    } else {
        libm::log(at / norm.upper()) / order as f64
    };
    Ok(GreenBound {
        kind: BoundKind::Lower,
        value,
        certificate: Certificate::Polynomial {
            label,
            poly: p.clone(),
            order,
            norm: *norm,
        },
    })
}

/// Green function of `{(0,0), (eps,0)}`: `max(G_D(z1; {0, eps}), log |z2|)`.
pub fn upper_bound_two_point(z: Complex2, eps: f64) -> Result<GreenBound> {
    check_bidisk(z)?;
    let eps_c = C64::new(eps, 0.0);
    let first = disk_green(C64::new(0.0, 0.0), z.c1)? + disk_green(eps_c, z.c1)?;
    let second = if z.c2.norm() == 0.0 {
        f64::NEG_INFINITY
    } else {
        libm::log(z.c2.norm())
    };
    Ok(GreenBound {
        kind: BoundKind::Upper,
        value: first.max(second),
        certificate: Certificate::TwoPoint { eps, fallback: false },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenConfig {
    pub sup_resolution: usize,
    pub envelope: EnvelopeConfig,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self {
            sup_resolution: DEFAULT_RESOLUTION,
            envelope: EnvelopeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LowerCandidate {
    label: PolyLabel,
    poly: BiPoly,
    order: u32,
    norm: SupNormResult,
}

/// Precomputed certificates for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenContext {
    frame: CanonicalFrame,
    poles: [Complex2; 3],
    lower: Vec<LowerCandidate>,
    config: GreenConfig,
}

impl GreenContext {
    pub fn new(frame: CanonicalFrame, config: GreenConfig) -> Result<Self> {
        let q = q_generators(&frame)?.generators;
        let p = line_product(&frame)?;
        let mut lower = Vec::with_capacity(4);
        let polys = [
            (PolyLabel::Q1, q[0].clone(), 1),
            (PolyLabel::LineProduct, p, 2),
            (PolyLabel::Q2, q[1].clone(), 1),
            (PolyLabel::Q3, q[2].clone(), 1),
        ];
        for (label, poly, order) in polys {
            let norm = sup_norm_bidisk(&poly, config.sup_resolution)?;
            lower.push(LowerCandidate {
                label,
                poly,
                order,
                norm,
            });
        }
        Ok(Self {
            frame,
            poles: frame.poles(),
            lower,
            config,
        })
    }

    pub fn frame(&self) -> &CanonicalFrame {
        &self.frame
    }

    pub fn poles(&self) -> [Complex2; 3] {
        self.poles
    }

    pub fn config(&self) -> &GreenConfig {
        &self.config
    }

    /// Sup-norm certificate of the line product.
    pub fn line_product_norm(&self) -> &SupNormResult {
        &self.lower[1].norm
    }

    /// Every polynomial lower bound, in the order Q1, P, Q2, Q3.
    pub fn lower_bounds(&self, z: Complex2) -> Result<Vec<GreenBound>> {
        check_bidisk(z)?;
        self.lower
            .iter()
            .map(|c| lower_bound_labelled(z, c.label, &c.poly, c.order, &c.norm))
            .collect()
    }

    /// Largest polynomial lower bound; ties go to the earlier candidate.
    pub fn lower_bound_best(&self, z: Complex2) -> Result<GreenBound> {
        let bounds = self.lower_bounds(z)?;
        if self.poles.contains(&z) {
            // every candidate vanishes here; rounding in the expanded form
            // must not turn that into a finite value
            let mut b = bounds.into_iter().next().ok_or(Error::ZeroPolynomial)?;
            b.value = f64::NEG_INFINITY;
            return Ok(b);
        }
        let mut best: Option<GreenBound> = None;
        for b in bounds {
            if best.as_ref().is_none_or(|x| b.value > x.value) {
                best = Some(b);
            }
        }
        best.ok_or(Error::ZeroPolynomial)
    }

    pub fn upper_bound_two_point(&self, z: Complex2) -> Result<GreenBound> {
        upper_bound_two_point(z, self.frame.eps)
    }

    /// Smallest admissible disk bound, also against the two-point formula
    /// when two-pole candidates are allowed.
    pub fn upper_bound_disk_envelope(&self, z: Complex2) -> Result<GreenBound> {
        self.envelope_with(z, &self.config.envelope)
    }

    pub fn envelope_with(&self, z: Complex2, cfg: &EnvelopeConfig) -> Result<GreenBound> {
        check_bidisk(z)?;
        if self.poles.contains(&z) {
            return Ok(GreenBound {
                kind: BoundKind::Upper,
                value: f64::NEG_INFINITY,
                certificate: Certificate::TwoPoint {
                    eps: self.frame.eps,
                    fallback: false,
                },
            });
        }
        let search = disk::search_envelope(z, &self.poles, cfg)?;
        let mut out = match search.best {
            Some(d) => GreenBound {
                kind: BoundKind::Upper,
                value: d.value,
                certificate: Certificate::Disk(d),
            },
            None => {
                let mut b = self.upper_bound_two_point(z)?;
                b.certificate = Certificate::TwoPoint {
                    eps: self.frame.eps,
                    fallback: true,
                };
                b
            }
        };
        if cfg.max_poles >= 2 {
            let two = self.upper_bound_two_point(z)?;
            if two.value < out.value {
                out = two;
            }
        }
        let lower = self.lower_bound_best(z)?;
        if out.value < lower.value - SANDWICH_TOL {
            return Err(Error::SandwichViolation {
                lower: lower.value,
                upper: out.value,
            });
        }
        Ok(out)
    }
}

pub fn lower_bound_best(z: Complex2, frame: &CanonicalFrame) -> Result<GreenBound> {
    GreenContext::new(*frame, GreenConfig::default())?.lower_bound_best(z)
}

pub fn upper_bound_disk_envelope(z: Complex2, frame: &CanonicalFrame, budget: usize) -> Result<GreenBound> {
    let mut config = GreenConfig::default();
    config.envelope.budget = budget;
    GreenContext::new(*frame, config)?.upper_bound_disk_envelope(z)
}

/// Hypothesis under which the three-halves value is a limit.
pub const DELTA_HYPOTHESIS: &str = "log|delta| / log|eps| -> 0";

/// Limit value of the Green function for the classified regime.
pub fn exact_limit(z: Complex2, c: &Classification) -> Result<GreenBound> {
    exact_limit_for(z, &c.regime)
}

pub fn exact_limit_for(z: Complex2, regime: &Regime) -> Result<GreenBound> {
    if z == Complex2::ZERO {
        return Err(Error::OutOfDomain("limit values are singular at the origin"));
    }
    let log = |x: f64| if x == 0.0 { f64::NEG_INFINITY } else { libm::log(x) };
    match *regime {
        Regime::CompleteIntersection { m } => Ok(GreenBound {
            kind: BoundKind::ExactLimit,
            value: log((z.c2 - m * z.c1 * z.c1).norm()).max(3.0 * log(z.c1.norm())),
            certificate: Certificate::LimitFormula { m },
        }),
        Regime::MaxSquareDegenerate | Regime::MaxSquareGeneric => {
            let three_halves = 1.5 * log(z.sup_norm());
            Ok(GreenBound {
                kind: BoundKind::ReferenceValue,
                value: three_halves,
                certificate: Certificate::Reference {
                    max_square: 2.0 * log(z.norm()),
                    three_halves,
                    hypothesis: DELTA_HYPOTHESIS,
                },
            })
        }
        Regime::Inconclusive => Err(Error::Inconclusive),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::line_polys;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn frame(eps: f64, rho: f64, delta: f64) -> CanonicalFrame {
        CanonicalFrame::from_params(eps, c(rho, 0.0), c(delta, 0.0)).unwrap()
    }

    fn degenerate(eps: f64) -> CanonicalFrame {
        frame(eps, eps / 2.0, eps.sqrt())
    }

    #[test]
    fn disk_green_examples() {
        assert_abs_diff_eq!(disk_green(c(0.0, 0.0), c(0.5, 0.0)).unwrap(), -core::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(disk_green(c(0.3, 0.1), c(0.3, 0.1)).unwrap(), f64::NEG_INFINITY);
        assert_abs_diff_eq!(disk_green(c(0.5, 0.0), c(0.0, 0.0)).unwrap(), libm::log(0.5), epsilon = 1e-15);
        assert!(disk_green(c(0.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(disk_green(c(0.0, 1.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn lower_bound_poly_examples() {
        let z1 = BiPoly::z1();
        let norm = sup_norm_bidisk(&z1, 512).unwrap();
        let b = lower_bound_poly(Complex2::real(0.5, 0.9), &z1, 1, &norm).unwrap();
        assert_abs_diff_eq!(b.value, libm::log(0.5), epsilon = 1e-12);
        assert_eq!(b.kind, BoundKind::Lower);

        // P = l1 l2 l3 by direct evaluation of the three factors
        let f = frame(0.1, 0.05, 0.01);
        let p = line_product(&f).unwrap();
        let norm = sup_norm_bidisk(&p, 512).unwrap();
        let z = Complex2::real(0.5, 0.5);
        let ls = line_polys(&f).unwrap();
        let hand: f64 = ls.iter().map(|l| l.eval(z).norm()).product();
        let b = lower_bound_poly(z, &p, 2, &norm).unwrap();
        assert_abs_diff_eq!(b.value, 0.5 * libm::log(hand / (norm.value + norm.uncertainty)), epsilon = 1e-14);

        let q1 = &q_generators(&f).unwrap().generators[0];
        let norm = sup_norm_bidisk(q1, 512).unwrap();
        let a2 = f.poles()[1];
        assert_eq!(lower_bound_poly(a2, q1, 1, &norm).unwrap().value, f64::NEG_INFINITY);
        assert!(lower_bound_poly(a2, q1, 0, &norm).is_err());
    }

    #[test]
    fn lower_bound_best_limits() {
        // The Q1 certificate at (0.5, 0) is off by about eps + |rho - eps| / delta,
        // i.e. 0.5 sqrt(eps) here, so 1e-2 needs eps below ~4e-4.
        for eps in [1e-4, 1e-5] {
            let ctx = GreenContext::new(degenerate(eps), GreenConfig::default()).unwrap();
            let b = ctx.lower_bound_best(Complex2::real(0.5, 0.0)).unwrap();
            assert!((b.value - 2.0 * libm::log(0.5)).abs() <= 1e-2, "{}", b.value);
            let b = ctx.lower_bound_best(Complex2::real(0.0, 0.5)).unwrap();
            assert!((b.value - 1.5 * libm::log(0.5)).abs() <= 1e-2, "{}", b.value);
            let a3 = ctx.poles()[2];
            assert_eq!(ctx.lower_bound_best(a3).unwrap().value, f64::NEG_INFINITY);
        }
    }

    #[test]
    fn two_point_examples() {
        let z = Complex2::real(0.5, 0.2);
        let b = upper_bound_two_point(z, 0.1).unwrap();
        assert_abs_diff_eq!(b.value, libm::log(0.5 * 0.4 / 0.95), epsilon = 1e-15);
        let b = upper_bound_two_point(z, 1e-9).unwrap();
        assert_abs_diff_eq!(b.value, 2.0 * libm::log(0.5), epsilon = 1e-8);
        for t in [0.1, 0.5, 0.9] {
            for eps in [0.1, 1e-3] {
                let b = upper_bound_two_point(Complex2::real(0.0, t), eps).unwrap();
                assert_eq!(b.value, libm::log(t));
            }
        }
        assert!(upper_bound_two_point(Complex2::real(0.5, 1.0), 0.1).is_err());
    }

    #[test]
    fn region_law_for_two_point_bound() {
        for (x, y) in [(0.5, 0.2), (0.7, 0.4), (0.3, 0.05), (0.9, 0.5), (0.4, 0.16)] {
            let b = upper_bound_two_point(Complex2::real(x, y), 1e-4).unwrap();
            assert!((b.value - 2.0 * libm::log(x)).abs() <= 1e-3);
        }
    }

    #[test]
    fn envelope_improves_on_two_point() {
        let ctx = GreenContext::new(frame(0.01, 0.005, 0.001), GreenConfig::default()).unwrap();
        let z = Complex2::real(0.5, 0.2);
        let env = ctx.upper_bound_disk_envelope(z).unwrap();
        let two = upper_bound_two_point(z, 0.01).unwrap();
        assert!(env.value <= two.value + SANDWICH_TOL);
        assert!(env.value >= ctx.lower_bound_best(z).unwrap().value - SANDWICH_TOL);
        if let Certificate::Disk(d) = &env.certificate {
            d.validate(z, &ctx.poles()).unwrap();
        }
    }

    #[test]
    fn envelope_monotone_in_pole_count() {
        let ctx = GreenContext::new(frame(0.01, 0.005, 0.3), GreenConfig::default()).unwrap();
        for z in [Complex2::real(0.5, 0.2), Complex2::real(0.3, 0.6), Complex2::new(c(0.2, 0.1), c(-0.3, 0.2))] {
            let v = |k| {
                let cfg = EnvelopeConfig {
                    max_poles: k,
                    ..Default::default()
                };
                ctx.envelope_with(z, &cfg).unwrap().value
            };
            let (one, two, three) = (v(1), v(2), v(3));
            assert!(three <= two && two <= one, "{one} {two} {three}");
        }
    }

    #[test]
    fn envelope_is_deterministic() {
        let ctx = GreenContext::new(frame(0.01, 0.005, 0.05), GreenConfig::default()).unwrap();
        let z = Complex2::real(0.35, 0.65);
        let a = ctx.upper_bound_disk_envelope(z).unwrap();
        let b = ctx.upper_bound_disk_envelope(z).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn envelope_at_a_pole_is_minus_infinity() {
        let ctx = GreenContext::new(frame(0.01, 0.005, 0.05), GreenConfig::default()).unwrap();
        let a2 = ctx.poles()[1];
        assert_eq!(ctx.upper_bound_disk_envelope(a2).unwrap().value, f64::NEG_INFINITY);
    }

    #[test]
    fn envelope_on_axis_beats_two_point_only_slightly() {
        // Single-passage disks cannot go below about log|z2| on the axis;
        // the limit value 3/2 log|z2| is out of reach for these families.
        let ctx = GreenContext::new(degenerate(1e-4), GreenConfig::default()).unwrap();
        let z = Complex2::real(0.0, 0.5);
        let env = ctx.upper_bound_disk_envelope(z).unwrap();
        assert!(env.value <= libm::log(0.5) + SANDWICH_TOL);
        assert!(env.value >= ctx.lower_bound_best(z).unwrap().value - SANDWICH_TOL);
    }

    #[test]
    fn exact_limit_examples() {
        let ci = |m: C64| Regime::CompleteIntersection { m };
        let b = exact_limit_for(Complex2::real(0.5, 0.5), &ci(c(0.0, 0.0))).unwrap();
        assert_eq!(b.kind, BoundKind::ExactLimit);
        assert_abs_diff_eq!(b.value, libm::log(0.5), epsilon = 1e-15);

        let b = exact_limit_for(Complex2::real(0.3, -0.18), &ci(c(-2.0, 0.0))).unwrap();
        assert_abs_diff_eq!(b.value, 3.0 * libm::log(0.3), epsilon = 1e-12);

        let b = exact_limit_for(Complex2::real(0.2, 0.5), &Regime::MaxSquareDegenerate).unwrap();
        assert_eq!(b.kind, BoundKind::ReferenceValue);
        assert_abs_diff_eq!(b.value, 1.5 * libm::log(0.5), epsilon = 1e-15);
        match b.certificate {
            Certificate::Reference { max_square, .. } => {
                assert_abs_diff_eq!(max_square, 2.0 * libm::log(libm::hypot(0.2, 0.5)), epsilon = 1e-15)
            }
            other => panic!("{other:?}"),
        }

        assert!(matches!(
            exact_limit_for(Complex2::ZERO, &ci(c(1.0, 0.0))),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            exact_limit_for(Complex2::real(0.1, 0.1), &Regime::Inconclusive),
            Err(Error::Inconclusive)
        ));
    }
}
