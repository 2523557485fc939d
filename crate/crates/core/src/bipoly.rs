//! Sparse bivariate polynomials with complex coefficients.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2, TAU};
use core::ops::{Add, Mul, Neg, Sub};

use crate::cxgeom::Complex2;
use crate::{Error, Result, C64};

/// Smallest accepted torus grid resolution for [`sup_norm_bidisk`].
pub const MIN_RESOLUTION: usize = 16;

/// Default torus grid resolution.
pub const DEFAULT_RESOLUTION: usize = 512;

/// `sum a_jk z1^j z2^k`, stored as a sparse table keyed by `(j, k)`.
///
/// Exactly-zero coefficients are never stored, so structural equality is
/// polynomial equality.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    coeffs: BTreeMap<(u32, u32), C64>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(j: u32, k: u32, c: C64) -> Self {
        let mut p = Self::zero();
        p.add_term(j, k, c);
        p
    }

    pub fn z1() -> Self {
        Self::monomial(1, 0, C64::new(1.0, 0.0))
    }

    pub fn z2() -> Self {
        Self::monomial(0, 1, C64::new(1.0, 0.0))
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, u32, C64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (j, k, c) in terms {
            p.add_term(j, k, c);
        }
        p
    }

    /// Adds `c z1^j z2^k`, dropping the entry if it cancels exactly.
    pub fn add_term(&mut self, j: u32, k: u32, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let entry = self.coeffs.entry((j, k)).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.coeffs.remove(&(j, k));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, j: u32, k: u32) -> C64 {
        self.coeffs.get(&(j, k)).copied().unwrap_or_default()
    }

    /// Terms in increasing `(j, k)` order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        self.coeffs.iter().map(|(&(j, k), &c)| (j, k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.coeffs.keys().map(|(j, k)| j + k).max().unwrap_or(0)
    }

    /// `sum |a_jk|`; an upper bound for the modulus on the closed bidisk.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// `sum |a_jk| (j + k)`; bounds the phase gradient on the torus.
    pub fn torus_lipschitz(&self) -> f64 {
        self.terms().map(|(j, k, c)| c.norm() * f64::from(j + k)).sum()
    }

    /// `sum |a_jk - b_jk|` over the union of supports.
    pub fn coeff_distance(&self, other: &BiPoly) -> f64 {
        (self - other).coeff_abs_sum()
    }

    pub fn scale(&self, s: C64) -> BiPoly {
        BiPoly::from_terms(self.terms().map(|(j, k, c)| (j, k, c * s)))
    }

    /// Horner evaluation in `z1` for each power of `z2`, then Horner in `z2`.
    pub fn eval(&self, z: Complex2) -> C64 {
        let Some(max_k) = self.coeffs.keys().map(|&(_, k)| k).max() else {
            return C64::new(0.0, 0.0);
        };
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..=max_k).rev() {
            let row: Vec<(u32, C64)> = self
                .coeffs
                .iter()
                .filter(|(&(_, kk), _)| kk == k)
                .map(|(&(j, _), &c)| (j, c))
                .collect();
            let inner = horner_sparse(&row, z.c1);
            acc = acc * z.c2 + inner;
        }
        acc
    }

    /// Splits into the terms of total degree `<= m` and the remainder.
    pub fn truncate(&self, m: u32) -> (BiPoly, BiPoly) {
        let (mut low, mut high) = (BiPoly::zero(), BiPoly::zero());
        for (j, k, c) in self.terms() {
            if j + k <= m {
                low.add_term(j, k, c);
            } else {
                high.add_term(j, k, c);
            }
        }
        (low, high)
    }

    pub fn d_z1(&self) -> BiPoly {
        BiPoly::from_terms(
            self.terms()
                .filter(|&(j, _, _)| j > 0)
                .map(|(j, k, c)| (j - 1, k, c * f64::from(j))),
        )
    }

    pub fn d_z2(&self) -> BiPoly {
        BiPoly::from_terms(
            self.terms()
                .filter(|&(_, k, _)| k > 0)
                .map(|(j, k, c)| (j, k - 1, c * f64::from(k))),
        )
    }

    pub fn pow(&self, n: u32) -> BiPoly {
        (0..n).fold(BiPoly::constant(C64::new(1.0, 0.0)), |acc, _| &acc * self)
    }

    /// `p(l1(z), l2(z))` for linear forms `l_i(z) = a_i z1 + b_i z2`, given
    /// as `[[a1, b1], [a2, b2]]`.
    pub fn compose_linear(&self, forms: [[C64; 2]; 2]) -> BiPoly {
        let l1 = BiPoly::from_terms([(1, 0, forms[0][0]), (0, 1, forms[0][1])]);
        let l2 = BiPoly::from_terms([(1, 0, forms[1][0]), (0, 1, forms[1][1])]);
        let mut out = BiPoly::zero();
        for (j, k, c) in self.terms() {
            out = &out + &(&l1.pow(j) * &l2.pow(k)).scale(c);
        }
        out
    }
}

fn horner_sparse(row: &[(u32, C64)], x: C64) -> C64 {
    // `row` is sorted by increasing exponent.
    let mut acc = C64::new(0.0, 0.0);
    let mut prev = match row.last() {
        Some(&(j, _)) => j,
        None => return acc,
    };
    for &(j, c) in row.iter().rev() {
        acc *= x.powu(prev - j);
        acc += c;
        prev = j;
    }
    acc * x.powu(prev)
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (j, k, c) in rhs.terms() {
            out.add_term(j, k, c);
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (j, k, c) in rhs.terms() {
            out.add_term(j, k, -c);
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (j1, k1, c1) in self.terms() {
            for (j2, k2, c2) in rhs.terms() {
                out.add_term(j1 + j2, k1 + k2, c1 * c2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BiPoly {
            type Output = BiPoly;
            fn $m(self, rhs: BiPoly) -> BiPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

pub fn add(p: &BiPoly, q: &BiPoly) -> BiPoly {
    p + q
}

pub fn mul(p: &BiPoly, q: &BiPoly) -> BiPoly {
    p * q
}

pub fn scale(p: &BiPoly, s: C64) -> BiPoly {
    p.scale(s)
}

pub fn eval(p: &BiPoly, z: Complex2) -> C64 {
    p.eval(z)
}

pub fn truncate(p: &BiPoly, m: u32) -> (BiPoly, BiPoly) {
    p.truncate(m)
}

/// Certified estimate of `sup |p|` over the closed unit bidisk.
///
/// The true supremum lies in `[value, value + uncertainty]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormResult {
    pub value: f64,
    /// Torus point where `|p| = value`.
    pub lower_witness: Complex2,
    pub uncertainty: f64,
    pub resolution: usize,
}

impl SupNormResult {
    /// Certified upper bound for the supremum.
    pub fn upper(&self) -> f64 {
        self.value + self.uncertainty
    }
}

/// Samples `|p|` on an `N x N` phase grid of the torus `|z1| = |z2| = 1`.
///
/// The sup over the closed bidisk is attained on the torus. With
/// `L = sum |a_jk| (j + k)` every torus point lies within phase distance
/// `pi sqrt(2) / N` of the grid, so `L pi sqrt(2) / N` bounds the sampling
/// error; the coefficient sum is a second upper bound and the smaller of the
/// two is reported. Ties are resolved toward the smallest grid index.
pub fn sup_norm_bidisk(p: &BiPoly, resolution: usize) -> Result<SupNormResult> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParameter("sup-norm resolution below 16"));
    }
    let n = resolution;
    let roots: Vec<C64> = (0..n)
        .map(|t| C64::from_polar(1.0, TAU * t as f64 / n as f64))
        .collect();
    let terms: Vec<(usize, usize, C64)> = p
        .terms()
        .map(|(j, k, c)| (j as usize % n, k as usize % n, c))
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let mut phases = vec![0usize; terms.len()];
    for i in 0..n {
        for (ph, &(j, _, _)) in phases.iter_mut().zip(&terms) {
            *ph = (i * j) % n;
        }
        for l in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (ph, &(_, k, c)) in phases.iter().zip(&terms) {
                s += c * roots[(ph + l * k) % n];
            }
            let v = s.norm();
            if v > best.0 {
                best = (v, i, l);
            }
        }
    }
    let (value, i, l) = best;
    let lipschitz_gap = p.torus_lipschitz() * PI * SQRT_2 / n as f64;
    let coeff_gap = (p.coeff_abs_sum() - value).max(0.0);
    Ok(SupNormResult {
        value,
        lower_witness: Complex2::new(roots[i], roots[l]),
        uncertainty: lipschitz_gap.min(coeff_gap),
        resolution: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let p = BiPoly::monomial(2, 0, c(1.0, 0.0));
        assert_abs_diff_eq!(p.eval(Complex2::real(0.5, 0.9)).re, 0.25);
        let p = BiPoly::from_terms([(0, 1, c(1.0, 0.0)), (2, 0, c(-2.0, 0.0))]);
        assert_eq!(p.eval(Complex2::real(1.0, 2.0)), c(0.0, 0.0));
        let p = BiPoly::from_terms([(1, 1, c(1.0, 0.0)), (0, 0, c(1.0, 0.0))]);
        assert_eq!(p.eval(Complex2::new(c(0.0, 1.0), c(0.0, 1.0))), c(0.0, 0.0));
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(&BiPoly::z1() * &BiPoly::z2(), BiPoly::monomial(1, 1, c(1.0, 0.0)));
        let (delta, rho) = (c(0.02, 0.0), c(0.05, 0.0));
        let q3 = &BiPoly::z2() * &(&BiPoly::z2() - &BiPoly::constant(delta * rho));
        assert_eq!(q3, BiPoly::from_terms([(0, 2, c(1.0, 0.0)), (0, 1, -delta * rho)]));
        let p = BiPoly::from_terms([(3, 1, c(0.3, -1.0)), (0, 0, c(2.0, 0.0))]);
        assert!((&p + &p.scale(c(-1.0, 0.0))).is_zero());
    }

    #[test]
    fn truncate_examples() {
        let p = BiPoly::from_terms([(0, 1, c(1.0, 0.0)), (2, 0, c(-2.0, 0.0)), (3, 0, c(1.0, 0.0))]);
        let (low, high) = p.truncate(2);
        assert_eq!(low, BiPoly::from_terms([(0, 1, c(1.0, 0.0)), (2, 0, c(-2.0, 0.0))]));
        assert_eq!(high, BiPoly::monomial(3, 0, c(1.0, 0.0)));
        let (low, high) = p.truncate(7);
        assert_eq!(low, p);
        assert!(high.is_zero());
        let (low, high) = BiPoly::monomial(1, 1, c(1.0, 0.0)).truncate(1);
        assert!(low.is_zero());
        assert_eq!(high, BiPoly::monomial(1, 1, c(1.0, 0.0)));
    }

    #[test]
    fn degree_and_normal_form() {
        assert_eq!(BiPoly::zero().total_degree(), 0);
        let p = BiPoly::from_terms([(1, 2, c(1.0, 0.0)), (1, 2, c(-1.0, 0.0)), (4, 0, c(0.5, 0.0))]);
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.total_degree(), 4);
    }

    #[test]
    fn sup_norm_of_monomial() {
        let r = sup_norm_bidisk(&BiPoly::z1(), 512).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-15);
        assert!(r.uncertainty <= PI * SQRT_2 / 512.0);
        assert!(r.uncertainty >= 0.0);
    }

    /// Brute-force maximum of `|z2 - m z1^2|` over an independent fine grid.
    fn brute_force_parabola_sup(m: C64, n: usize) -> f64 {
        let mut best = 0.0f64;
        for i in 0..n {
            for l in 0..n {
                let a = 2.0 * PI * i as f64 / n as f64;
                let b = 2.0 * PI * l as f64 / n as f64;
                let z1 = C64::new(libm::cos(a), libm::sin(a));
                let z2 = C64::new(libm::cos(b), libm::sin(b));
                best = best.max((z2 - m * z1 * z1).norm());
            }
        }
        best
    }

    #[test]
    fn sup_norm_of_parabola_generator() {
        let m = c(-2.0, 0.0);
        let oracle = brute_force_parabola_sup(m, 720);
        assert_abs_diff_eq!(oracle, 3.0, epsilon = 1e-9);
        let p = BiPoly::from_terms([(0, 1, c(1.0, 0.0)), (2, 0, -m)]);
        let r = sup_norm_bidisk(&p, 512).unwrap();
        assert!(r.value <= oracle + 1e-12);
        assert!((r.value - 3.0).abs() <= r.uncertainty + 1e-12);
    }

    #[test]
    fn sup_norm_rejects_zero_and_coarse_grids() {
        assert_eq!(sup_norm_bidisk(&BiPoly::zero(), 64), Err(Error::ZeroPolynomial));
        assert!(sup_norm_bidisk(&BiPoly::z1(), 8).is_err());
    }

    #[test]
    fn compose_linear_matches_substitution() {
        let p = BiPoly::from_terms([(2, 1, c(0.5, 0.2)), (0, 1, c(-1.0, 0.0)), (1, 0, c(0.0, 3.0))]);
        let forms = [[c(0.6, 0.0), c(0.0, 0.8)], [c(0.0, 0.8), c(0.6, 0.0)]];
        let q = p.compose_linear(forms);
        let z = Complex2::new(c(0.3, -0.2), c(0.1, 0.7));
        let w = Complex2::new(
            forms[0][0] * z.c1 + forms[0][1] * z.c2,
            forms[1][0] * z.c1 + forms[1][1] * z.c2,
        );
        assert!((q.eval(z) - p.eval(w)).norm() < 1e-14);
    }

    fn arb_poly() -> impl Strategy<Value = BiPoly> {
        proptest::collection::vec((0u32..4, 0u32..4, -1.0f64..1.0, -1.0f64..1.0), 1..7).prop_map(
            |ts| BiPoly::from_terms(ts.into_iter().map(|(j, k, a, b)| (j, k, C64::new(a, b)))),
        )
    }

    fn arb_bidisk_point() -> impl Strategy<Value = Complex2> {
        (0.0f64..1.0, 0.0f64..6.3, 0.0f64..1.0, 0.0f64..6.3).prop_map(|(r1, t1, r2, t2)| {
            Complex2::new(C64::from_polar(r1, t1), C64::from_polar(r2, t2))
        })
    }

    proptest! {
        #[test]
        fn eval_is_multiplicative(p in arb_poly(), q in arb_poly(), z in arb_bidisk_point()) {
            let lhs = (&p * &q).eval(z);
            let rhs = p.eval(z) * q.eval(z);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }

        #[test]
        fn truncate_reassembles(p in arb_poly(), m in 0u32..6) {
            let (low, high) = p.truncate(m);
            prop_assert!(low.terms().all(|(j, k, _)| j + k <= m));
            prop_assert_eq!(&low + &high, p);
        }

        #[test]
        fn sup_norm_brackets(p in arb_poly()) {
            prop_assume!(!p.is_zero());
            let coarse = sup_norm_bidisk(&p, 32).unwrap();
            let fine = sup_norm_bidisk(&p, 64).unwrap();
            prop_assert!(coarse.value <= p.coeff_abs_sum() + 1e-12);
            prop_assert!((p.eval(coarse.lower_witness).norm() - coarse.value).abs() < 1e-12);
            prop_assert!(fine.value >= coarse.value);
            prop_assert!(fine.upper() <= coarse.upper() + 1e-12);
        }
    }
}
