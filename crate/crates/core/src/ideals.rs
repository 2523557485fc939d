//! Generators of the vanishing ideal of a triple, the line product, and the
//! limit ideals reached as the triple collapses.

use alloc::vec;
use alloc::vec::Vec;

use crate::bipoly::BiPoly;
use crate::cxgeom::{CanonicalFrame, Complex2, PointTriple};
use crate::{Error, Result, C64};

/// `|(rho - eps) / delta|` above which [`q_generators`] flags ill-conditioning.
pub const CONDITIONING_LIMIT: f64 = 1e6;

const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdealLabel {
    TripleIdeal,
    CompleteIntersectionLimit { m: C64 },
    MaximalSquare,
}

/// Which coordinates the generators are written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    /// Coordinates of the canonical frame, `w_j = z . conj(e_j)`.
    Frame,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdealWarning {
    /// The `z2` coefficient of `Q1` has modulus above [`CONDITIONING_LIMIT`].
    IllConditioned { coefficient: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealPresentation {
    pub generators: Vec<BiPoly>,
    pub label: IdealLabel,
    pub coordinates: Coordinates,
    pub warnings: Vec<IdealWarning>,
}

impl IdealPresentation {
    fn new(generators: Vec<BiPoly>, label: IdealLabel) -> Self {
        Self {
            generators,
            label,
            coordinates: Coordinates::Frame,
            warnings: Vec::new(),
        }
    }

    /// Rewrites frame-coordinate generators in standard coordinates.
    pub fn to_standard(&self, frame: &CanonicalFrame) -> IdealPresentation {
        if self.coordinates == Coordinates::Standard {
            return self.clone();
        }
        IdealPresentation {
            generators: self.generators.iter().map(|g| frame_to_standard(g, frame)).collect(),
            coordinates: Coordinates::Standard,
            ..self.clone()
        }
    }
}

/// `p(z . conj e1, z . conj e2)` as a polynomial in standard coordinates.
pub fn frame_to_standard(p: &BiPoly, frame: &CanonicalFrame) -> BiPoly {
    let (e1, e2) = (frame.e1, frame.e2);
    p.compose_linear([[e1.c1.conj(), e1.c2.conj()], [e2.c1.conj(), e2.c2.conj()]])
}

fn lin(a: C64, b: C64, c: C64) -> BiPoly {
    // a z1 + b z2 + c
    BiPoly::from_terms([(1, 0, a), (0, 1, b), (0, 0, c)])
}

/// `Q1 = w1^2 - eps w1 - ((rho - eps) / delta) w2`,
/// `Q2 = w2 (w1 - rho)`, `Q3 = w2 (w2 - delta rho)`, in frame coordinates.
pub fn q_generators(frame: &CanonicalFrame) -> Result<IdealPresentation> {
    let CanonicalFrame { eps, rho, delta, .. } = *frame;
    if delta.norm() == 0.0 {
        return Err(Error::CollinearTriple { det: 0.0 });
    }
    let eps = C64::new(eps, 0.0);
    let coupling = (rho - eps) / delta;
    let q1 = BiPoly::from_terms([(2, 0, ONE), (1, 0, -eps), (0, 1, -coupling)]);
    let w2 = BiPoly::z2();
    let q2 = &w2 * &lin(ONE, C64::default(), -rho);
    let q3 = &w2 * &lin(C64::default(), ONE, -delta * rho);
    let mut out = IdealPresentation::new(vec![q1, q2, q3], IdealLabel::TripleIdeal);
    if coupling.norm() > CONDITIONING_LIMIT {
        out.warnings.push(IdealWarning::IllConditioned {
            coefficient: coupling.norm(),
        });
    }
    Ok(out)
}

/// The lines through pairs of poles, in frame coordinates:
/// `l1 = w2` (through `a1, a2`), `l2 = w2 - delta w1` (through `a1, a3`),
/// `l3 = w2 - delta rho / (rho - eps) (w1 - eps)` (through `a2, a3`).
pub fn line_polys(frame: &CanonicalFrame) -> Result<[BiPoly; 3]> {
    let CanonicalFrame { eps, rho, delta, .. } = *frame;
    let eps = C64::new(eps, 0.0);
    if (rho - eps).norm() <= 1e-15 * eps.norm() {
        return Err(Error::DegenerateInput("rho equals eps"));
    }
    let slope = delta * rho / (rho - eps);
    Ok([
        BiPoly::z2(),
        lin(-delta, ONE, C64::default()),
        lin(-slope, ONE, slope * eps),
    ])
}

/// `P = l1 l2 l3`, which vanishes to second order at every pole.
pub fn line_product(frame: &CanonicalFrame) -> Result<BiPoly> {
    let [l1, l2, l3] = line_polys(frame)?;
    Ok(&(&l1 * &l2) * &l3)
}

/// `<z2 - m z1^2, z1^3>`.
pub fn limit_ideal_ci(m: C64) -> IdealPresentation {
    let g1 = BiPoly::from_terms([(0, 1, ONE), (2, 0, -m)]);
    let g2 = BiPoly::monomial(3, 0, ONE);
    IdealPresentation {
        coordinates: Coordinates::Standard,
        ..IdealPresentation::new(vec![g1, g2], IdealLabel::CompleteIntersectionLimit { m })
    }
}

/// `<z1^2, z1 z2, z2^2>`, the square of the maximal ideal at the origin.
pub fn maximal_square() -> IdealPresentation {
    IdealPresentation {
        coordinates: Coordinates::Standard,
        ..IdealPresentation::new(
            vec![
                BiPoly::monomial(2, 0, ONE),
                BiPoly::monomial(1, 1, ONE),
                BiPoly::monomial(0, 2, ONE),
            ],
            IdealLabel::MaximalSquare,
        )
    }
}

/// `w2 - (delta / (rho - eps)) w1 (w1 - eps)` and `w1 (w1 - eps) (w1 - rho)`,
/// members of the triple ideal converging to the generators of the limit
/// ideal `<z2 - m z1^2, z1^3>`.
pub fn ci_rescaled_generators(frame: &CanonicalFrame) -> Result<[BiPoly; 2]> {
    let m = frame.m_value()?;
    let eps = C64::new(frame.eps, 0.0);
    let w1 = BiPoly::z1();
    let w1_shift = lin(ONE, C64::default(), -eps);
    let quad = &w1 * &w1_shift;
    let g1 = &BiPoly::z2() - &quad.scale(m);
    let g2 = &quad * &lin(ONE, C64::default(), -frame.rho);
    Ok([g1, g2])
}

/// Combinations of `Q1, Q2, Q3` approximating `z1^2, z1 z2, z2^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialLimits {
    /// `f1, f2, f3` in frame coordinates; `f2` uses the coefficients exactly
    /// as printed in the source formula, where `Q2` appears twice and `Q3`
    /// does not appear.
    pub combos: [BiPoly; 3],
    /// `f2` with the last term applied to `Q3`, which is the expansion of
    /// `z1 z2` in frame coordinates.
    pub f2_symmetric: BiPoly,
    /// L1 coefficient distance of each `f_i`, in standard coordinates, to
    /// `z1^2`, `z1 z2`, `z2^2`.
    pub distances: [f64; 3],
    pub f2_symmetric_distance: f64,
}

pub fn monomial_limit_combinations(frame: &CanonicalFrame) -> Result<MonomialLimits> {
    let q = q_generators(frame)?.generators;
    let [[a11, a12], [a21, a22]] = frame.alpha();
    let comb = |c1: C64, c2: C64, c3: C64, p2: &BiPoly| {
        &(&q[0].scale(c1) + &q[1].scale(c2)) + &p2.scale(c3)
    };
    let f1 = comb(a11 * a11, 2.0 * a11 * a12, a12 * a12, &q[2]);
    let f2 = comb(a11 * a21, a11 * a22 + a12 * a21, a12 * a22, &q[1]);
    let f3 = comb(a21 * a21, 2.0 * a21 * a22, a22 * a22, &q[2]);
    let f2_symmetric = comb(a11 * a21, a11 * a22 + a12 * a21, a12 * a22, &q[2]);

    let targets = [
        BiPoly::monomial(2, 0, ONE),
        BiPoly::monomial(1, 1, ONE),
        BiPoly::monomial(0, 2, ONE),
    ];
    let dist = |f: &BiPoly, t: &BiPoly| frame_to_standard(f, frame).coeff_distance(t);
    let distances = [
        dist(&f1, &targets[0]),
        dist(&f2, &targets[1]),
        dist(&f3, &targets[2]),
    ];
    let f2_symmetric_distance = dist(&f2_symmetric, &targets[1]);
    Ok(MonomialLimits {
        combos: [f1, f2, f3],
        f2_symmetric,
        distances,
        f2_symmetric_distance,
    })
}

/// `|p(a_i)| / max(1, sum |coefficients|)` at the three points.
pub fn vanishing_residual_at(p: &BiPoly, points: &[Complex2; 3]) -> [f64; 3] {
    let scale = p.coeff_abs_sum().max(1.0);
    points.map(|a| p.eval(a).norm() / scale)
}

pub fn vanishing_residual(p: &BiPoly, t: &PointTriple) -> [f64; 3] {
    vanishing_residual_at(p, &t.points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxgeom::{build_frame, canonicalize};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn frame(eps: f64, rho: f64, delta: f64) -> CanonicalFrame {
        CanonicalFrame::from_params(eps, c(rho, 0.0), c(delta, 0.0)).unwrap()
    }

    #[test]
    fn q_generators_vanish_on_poles() {
        let f = frame(0.1, 0.05, 0.02);
        let q = q_generators(&f).unwrap().generators;
        let [_, a2, a3] = f.poles();
        assert_abs_diff_eq!(q[0].eval(a2).norm(), 0.0, epsilon = 1e-17);
        assert_abs_diff_eq!(q[0].eval(a3).norm(), 0.0, epsilon = 1e-17);
        assert_abs_diff_eq!(q[1].eval(a3).norm(), 0.0, epsilon = 1e-17);
        assert_abs_diff_eq!(q[2].eval(a2).norm(), 0.0, epsilon = 1e-17);
        for g in &q {
            for r in vanishing_residual_at(g, &f.poles()) {
                assert!(r < 1e-14);
            }
        }
    }

    #[test]
    fn q_generators_reject_zero_delta() {
        let f = frame(0.1, 0.05, 0.0);
        assert!(matches!(q_generators(&f), Err(Error::CollinearTriple { .. })));
    }

    #[test]
    fn q_generators_flag_conditioning() {
        let f = frame(0.1, 0.05, 1e-9);
        let pres = q_generators(&f).unwrap();
        assert!(matches!(pres.warnings[..], [IdealWarning::IllConditioned { .. }]));
        assert!(q_generators(&frame(0.1, 0.05, 0.02)).unwrap().warnings.is_empty());
    }

    #[test]
    fn lines_pass_through_pairs() {
        let f = frame(0.1, 0.05, 0.02);
        let [a1, a2, a3] = f.poles();
        let [l1, l2, l3] = line_polys(&f).unwrap();
        assert_eq!(l1.eval(a1), c(0.0, 0.0));
        assert_eq!(l1.eval(a2), c(0.0, 0.0));
        assert!(l2.eval(a3).norm() < 1e-18);
        assert!(l3.eval(a3).norm() < 1e-18);
        assert!(l3.eval(a2).norm() < 1e-18);
        // each line misses the third pole
        assert!(l1.eval(a3).norm() > 1e-4);
        assert!(l2.eval(a2).norm() > 1e-4);
        assert!(l3.eval(a1).norm() > 1e-5);
    }

    #[test]
    fn line_product_vanishes_to_second_order() {
        let f = frame(0.1, 0.04, 0.3);
        let p = line_product(&f).unwrap();
        let (d1, d2) = (p.d_z1(), p.d_z2());
        for a in f.poles() {
            assert!(p.eval(a).norm() < 1e-15);
            assert!(d1.eval(a).norm() < 1e-15);
            assert!(d2.eval(a).norm() < 1e-15);
        }
    }

    #[test]
    fn line_polys_reject_rho_equal_eps() {
        assert!(line_polys(&frame(0.1, 0.1, 0.02)).is_err());
    }

    #[test]
    fn limit_ideal_examples() {
        let g = limit_ideal_ci(c(0.0, 0.0)).generators;
        assert_eq!(g, vec![BiPoly::z2(), BiPoly::monomial(3, 0, ONE)]);
        let g = limit_ideal_ci(c(-2.0, 0.0)).generators;
        assert_eq!(g[0], BiPoly::from_terms([(0, 1, ONE), (2, 0, c(2.0, 0.0))]));
        let g = limit_ideal_ci(c(0.0, 1.0)).generators;
        assert_eq!(g[0], BiPoly::from_terms([(0, 1, ONE), (2, 0, c(0.0, -1.0))]));
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn maximal_square_vanishes_to_second_order() {
        let pres = maximal_square();
        assert_eq!(pres.generators.len(), 3);
        for g in &pres.generators {
            assert_eq!(g.eval(Complex2::ZERO), c(0.0, 0.0));
            assert_eq!(g.d_z1().eval(Complex2::ZERO), c(0.0, 0.0));
            assert_eq!(g.d_z2().eval(Complex2::ZERO), c(0.0, 0.0));
        }
        let z1_cubed = &BiPoly::z1() * &pres.generators[0];
        assert_eq!(z1_cubed, BiPoly::monomial(3, 0, ONE));
    }

    #[test]
    fn ci_generators_reduce_mixed_monomials() {
        // z1 z2 = z1 (z2 - m z1^2) + m z1^3, coefficient-exact.
        let m = c(-2.0, 0.5);
        let g = limit_ideal_ci(m).generators;
        let lhs = BiPoly::monomial(1, 1, ONE);
        let rhs = &(&BiPoly::z1() * &g[0]) + &g[1].scale(m);
        assert_eq!(lhs, rhs);
        // z2^2 = (z2 + m z1^2)(z2 - m z1^2) + m^2 z1 z1^3
        let plus = BiPoly::from_terms([(0, 1, ONE), (2, 0, m)]);
        let rhs = &(&plus * &g[0]) + &(&BiPoly::z1() * &g[1]).scale(m * m);
        assert!(BiPoly::monomial(0, 2, ONE).coeff_distance(&rhs) < 1e-15);
    }

    #[test]
    fn monomial_limits_identity_frame() {
        let (eps, rho, delta) = (0.1, 0.05, 0.02);
        let lim = monomial_limit_combinations(&frame(eps, rho, delta)).unwrap();
        let q = q_generators(&frame(eps, rho, delta)).unwrap().generators;
        assert_eq!(lim.combos[0], q[0]);
        let expected = eps + ((rho - eps) / delta).abs();
        assert_abs_diff_eq!(lim.distances[0], expected, epsilon = 1e-14);
    }

    #[test]
    fn monomial_limits_degenerate_family() {
        let eps: f64 = 1e-6;
        let lim = monomial_limit_combinations(&frame(eps, eps / 2.0, eps.sqrt())).unwrap();
        assert!(lim.distances[0] <= 2e-3);
        // f3 = Q3 here, at distance |delta rho| from z2^2
        assert!(lim.distances[2] <= 1e-9);
    }

    #[test]
    fn monomial_limits_f3_converges() {
        let mut prev = f64::INFINITY;
        for e in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let lim = monomial_limit_combinations(&frame(e, e / 2.0, libm::sqrt(e))).unwrap();
            assert!(lim.distances[2] < prev);
            prev = lim.distances[2];
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn printed_f2_differs_from_symmetric_expansion() {
        // With a rotated frame both alpha_12 and alpha_22 are nonzero and the
        // printed f2 (Q2 twice) no longer tends to z1 z2.
        let t = canonicalize(
            Complex2::ZERO,
            Complex2::real(0.6e-3, 0.8e-3),
            Complex2::new(c(0.3e-3, 0.0), c(0.4e-3, 0.2e-3)),
        )
        .unwrap();
        let f = build_frame(&t).unwrap();
        let lim = monomial_limit_combinations(&f).unwrap();
        assert!(lim.f2_symmetric_distance < lim.distances[1]);
    }

    #[test]
    fn vanishing_residual_examples() {
        let t = PointTriple::frame_aligned(0.1, c(0.05, 0.0), c(0.02, 0.0)).unwrap();
        let q1 = &q_generators(&frame(0.1, 0.05, 0.02)).unwrap().generators[0];
        for r in vanishing_residual(q1, &t) {
            assert!(r <= 1e-14);
        }
        let one = BiPoly::constant(ONE);
        assert_eq!(vanishing_residual(&one, &t), [1.0, 1.0, 1.0]);

        // z2 - m z1^2 on a triple with delta / (rho - eps) = m:
        // residual at a3 is |delta rho - m rho^2| / max(1, 1 + |m|).
        let eps = 0.1;
        let rho = eps / 2.0;
        let m = -2.0;
        let delta = m * (rho - eps);
        let t = PointTriple::frame_aligned(eps, c(rho, 0.0), c(delta, 0.0)).unwrap();
        let g = &limit_ideal_ci(c(m, 0.0)).generators[0];
        let r = vanishing_residual(g, &t);
        let expected = (delta * rho - m * rho * rho).abs() / (1.0 + m.abs());
        assert_abs_diff_eq!(r[2], expected, epsilon = 1e-15);
        assert!(r[2] > 0.0);
    }

    #[test]
    fn rescaled_ci_generators_converge() {
        let mut prev = [f64::INFINITY; 2];
        let limit = limit_ideal_ci(c(-2.0, 0.0)).generators;
        for e in [1e-1, 1e-2, 1e-3, 1e-4] {
            let g = ci_rescaled_generators(&frame(e, e / 2.0, e)).unwrap();
            let d = [g[0].coeff_distance(&limit[0]), g[1].coeff_distance(&limit[1])];
            // O(eps): 2 eps and 3/2 eps + eps^2 / 2
            assert_abs_diff_eq!(d[0], 2.0 * e, epsilon = 1e-12);
            assert_abs_diff_eq!(d[1], 1.5 * e + 0.5 * e * e, epsilon = 1e-12);
            assert!(d[0] < prev[0] && d[1] < prev[1]);
            prev = d;
        }
    }

    fn arb_frame() -> impl Strategy<Value = CanonicalFrame> {
        (-6.0f64..-0.52, 0.05f64..0.5, 0.0f64..6.3, -3.0f64..0.0, 0.0f64..6.3).prop_map(
            |(le, rr, rt, ld, dt)| {
                let eps = libm::pow(10.0, le);
                let rho = C64::from_polar(rr * eps, rt);
                let delta = C64::from_polar(libm::pow(10.0, ld), dt);
                CanonicalFrame::from_params(eps, rho, delta).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn generators_vanish_for_random_frames(f in arb_frame()) {
            let pres = q_generators(&f).unwrap();
            let poles = f.poles();
            for g in pres.generators.iter().chain([line_product(&f).unwrap()].iter()) {
                for r in vanishing_residual_at(g, &poles) {
                    prop_assert!(r <= 1e-10);
                }
            }
        }

        #[test]
        fn standard_generators_vanish_on_original_triple(
            x in proptest::array::uniform4(-1.0f64..1.0),
            y in proptest::array::uniform4(-1.0f64..1.0),
            s in -5.0f64..-0.5,
        ) {
            let scale = libm::pow(10.0, s);
            let p = Complex2::new(c(x[0], x[1]), c(x[2], x[3])) * scale;
            let q = Complex2::new(c(y[0], y[1]), c(y[2], y[3])) * scale;
            prop_assume!(p != q && p.norm() > 0.0 && q.norm() > 0.0);
            let t = canonicalize(Complex2::ZERO, p, q).unwrap();
            prop_assume!(crate::cxgeom::normalized_det(&t).unwrap() > 1e-8);
            let f = build_frame(&t).unwrap();
            let std = q_generators(&f).unwrap().to_standard(&f);
            for g in &std.generators {
                for r in vanishing_residual(g, &t) {
                    prop_assert!(r <= 1e-10);
                }
            }
        }
    }
}
