//! Analytic disks through the poles and the upper bounds they certify.
//!
//! A holomorphic `h: D -> D^2` with `h(zeta0) = z` and `h(zeta_j) = a_j`
//! bounds the Green function at `z` by `sum_j log |phi(zeta0, zeta_j)|`,
//! where `phi(a, .)` is the Möbius involution exchanging `a` and 0.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::cxgeom::{det, hermitian_dot, Complex2};
use crate::optim::{minimize_with_restarts, Bounds, NelderMeadConfig};
use crate::{Error, Result, C64};

/// Boundary samples used to validate a finished candidate.
pub const BOUNDARY_SAMPLES: usize = 256;
/// Required clearance from the unit circle at the sampled boundary points.
pub const BOUNDARY_MARGIN: f64 = 1e-9;
/// Tolerance on `|h(zeta_j) - a_j|` and `|h(zeta0) - z|`.
pub const PREIMAGE_TOL: f64 = 1e-10;
/// The same tolerance relative to the smallest distance between `z` and the
/// poles; the smaller of the two applies. Without it a disk could land
/// "on" several poles of a tight cluster at once.
pub const PREIMAGE_REL: f64 = 1e-6;
// Construction keeps a larger clearance than validation demands.
const BUILD_MARGIN: f64 = 2.0 * BOUNDARY_MARGIN;
const COLLINEAR_REL: f64 = 1e-12;
const NODE_SEPARATION: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiskFamily {
    AffineOnePole,
    AffineTwoPole,
    QuadraticPhi,
    CubicGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiskMap {
    /// `zeta -> center + direction * zeta`.
    Affine { center: Complex2, direction: Complex2 },
    /// `zeta -> (w, F(w))` with `w = w_center + w_radius * zeta`; `coeffs`
    /// are the monomial coefficients of `F` in `w`, lowest first.
    Graph {
        w_center: C64,
        w_radius: f64,
        coeffs: Vec<C64>,
    },
}

fn horner(coeffs: &[C64], w: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c)
}

impl DiskMap {
    pub fn eval(&self, zeta: C64) -> Complex2 {
        match self {
            DiskMap::Affine { center, direction } => *center + *direction * zeta,
            DiskMap::Graph {
                w_center,
                w_radius,
                coeffs,
            } => {
                let w = w_center + zeta * *w_radius;
                Complex2::new(w, horner(coeffs, w))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskCandidate {
    pub family: DiskFamily,
    pub map: DiskMap,
    /// `zeta0` with `map(zeta0) = z`.
    pub base: C64,
    /// `(pole index, zeta_j)` with `map(zeta_j) = a_j`.
    pub preimages: Vec<(usize, C64)>,
    pub value: f64,
}

/// `phi(a, zeta) = (a - zeta) / (1 - conj(a) zeta)`.
pub fn mobius_involution(a: C64, zeta: C64) -> C64 {
    (a - zeta) / (C64::new(1.0, 0.0) - a.conj() * zeta)
}

/// `sum_j log |phi(base, zeta_j)|`, or `None` if some point leaves the disk.
pub fn disk_bound_value(base: C64, preimages: &[C64]) -> Option<f64> {
    if base.norm() >= 1.0 || preimages.iter().any(|t| t.norm() >= 1.0) {
        return None;
    }
    Some(
        preimages
            .iter()
            .map(|t| libm::log(mobius_involution(base, *t).norm()))
            .sum(),
    )
}

impl DiskCandidate {
    /// Checks the candidate against `z` and `poles`: boundary samples stay
    /// inside the closed bidisk with margin and all preimages land.
    pub fn validate(&self, z: Complex2, poles: &[Complex2]) -> core::result::Result<(), &'static str> {
        for k in 0..BOUNDARY_SAMPLES {
            let theta = 2.0 * core::f64::consts::PI * k as f64 / BOUNDARY_SAMPLES as f64;
            let p = self.map.eval(C64::from_polar(1.0, theta));
            if p.sup_norm() > 1.0 - BOUNDARY_MARGIN {
                return Err("boundary sample leaves the bidisk");
            }
        }
        let mut points = Vec::with_capacity(poles.len() + 1);
        points.push(z);
        points.extend_from_slice(poles);
        let mut spacing: f64 = 1.0;
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                spacing = spacing.min((points[a] - points[b]).norm());
            }
        }
        let tol = PREIMAGE_TOL.min(PREIMAGE_REL * spacing);
        if self.base.norm() >= 1.0 || (self.map.eval(self.base) - z).norm() > tol {
            return Err("base point does not map to z");
        }
        for (i, (j, t)) in self.preimages.iter().enumerate() {
            let pole = poles.get(*j).ok_or("pole index out of range")?;
            if t.norm() >= 1.0 || (self.map.eval(*t) - *pole).norm() > tol {
                return Err("preimage does not map to its pole");
            }
            if self.preimages[..i].iter().any(|(k, s)| k == j || s == t) {
                return Err("repeated pole or preimage");
            }
        }
        Ok(())
    }

    pub fn recompute_value(&self) -> Option<f64> {
        let ts: Vec<C64> = self.preimages.iter().map(|p| p.1).collect();
        disk_bound_value(self.base, &ts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    /// Random restarts per candidate family member, on top of the fixed
    /// starting points.
    pub budget: usize,
    pub seed: u64,
    /// Only candidates hitting at most this many poles are used.
    pub max_poles: usize,
    pub nelder_mead: NelderMeadConfig,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            budget: 4,
            seed: 0,
            max_poles: 3,
            nelder_mead: NelderMeadConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSearch {
    /// Best validated candidate, if any.
    pub best: Option<DiskCandidate>,
    pub evaluated: usize,
    pub rejected: usize,
}

/// Pieces of a search problem: a parametrized disk with two real
/// parameters (a complex center) and its pole hits.
trait Problem {
    fn family(&self) -> DiskFamily;
    fn build(&self, c: C64) -> Option<DiskCandidate>;
    fn starts(&self) -> Vec<C64>;
    fn search_box(&self) -> (C64, f64);
    fn pole_indices(&self) -> Vec<usize>;
}

/// Straight disks in the complex line `z + t * dir`, `dir = a_anchor - z`.
struct LineProblem {
    z: Complex2,
    dir: Complex2,
    /// `(pole index, t)` for the poles counted by this candidate.
    hits: Vec<(usize, C64)>,
}

impl LineProblem {
    fn radius(&self, c: C64) -> f64 {
        let p = self.z + self.dir * c;
        let mut r = f64::INFINITY;
        for (zi, wi) in [(p.c1, self.dir.c1), (p.c2, self.dir.c2)] {
            let room = 1.0 - BUILD_MARGIN - zi.norm();
            if wi.norm() == 0.0 {
                if room <= 0.0 {
                    return 0.0;
                }
            } else {
                r = r.min(room / wi.norm());
            }
        }
        r
    }
}

impl Problem for LineProblem {
    fn family(&self) -> DiskFamily {
        if self.hits.len() == 1 {
            DiskFamily::AffineOnePole
        } else {
            DiskFamily::AffineTwoPole
        }
    }

    fn build(&self, c: C64) -> Option<DiskCandidate> {
        let r = self.radius(c);
        if !(r > 0.0 && r.is_finite()) {
            return None;
        }
        let base = -c / r;
        let preimages: Vec<(usize, C64)> = self.hits.iter().map(|(j, t)| (*j, (t - c) / r)).collect();
        let ts: Vec<C64> = preimages.iter().map(|p| p.1).collect();
        let value = disk_bound_value(base, &ts)?;
        Some(DiskCandidate {
            family: self.family(),
            map: DiskMap::Affine {
                center: self.z + self.dir * c,
                direction: self.dir * r,
            },
            base,
            preimages,
            value,
        })
    }

    fn starts(&self) -> Vec<C64> {
        let t = self.hits[0].1;
        vec![t, C64::new(0.0, 0.0), t * 0.5]
    }

    fn pole_indices(&self) -> Vec<usize> {
        self.hits.iter().map(|h| h.0).collect()
    }

    fn search_box(&self) -> (C64, f64) {
        let reach = self.hits.iter().map(|h| h.1.norm()).fold(1.0, f64::max);
        (C64::new(0.0, 0.0), 2.0 * reach)
    }
}

/// Graph disks `w -> (w, F(w))` over a disk in the first coordinate, with
/// `F` interpolating `z` and the chosen poles.
struct GraphProblem {
    z: Complex2,
    coeffs: Vec<C64>,
    hits: Vec<(usize, C64)>,
}

/// Monomial coefficients of the interpolating polynomial through
/// `(xs[k], ys[k])`, built from divided differences.
fn interpolate(xs: &[C64], ys: &[C64]) -> Vec<C64> {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for k in (level..n).rev() {
            dd[k] = (dd[k] - dd[k - 1]) / (xs[k] - xs[k - level]);
        }
    }
    // Horner on the Newton form, expanding into monomials.
    let mut coeffs = vec![C64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        // coeffs <- coeffs * (w - xs[k]) + dd[k]
        let mut next = vec![C64::new(0.0, 0.0); n];
        for (i, c) in coeffs.iter().enumerate() {
            if i + 1 < n {
                next[i + 1] += c;
            }
            next[i] -= c * xs[k];
        }
        next[0] += dd[k];
        coeffs = next;
    }
    coeffs
}

/// Taylor coefficients of `F` at `c`.
fn shift(coeffs: &[C64], c: C64) -> Vec<C64> {
    let mut b = coeffs.to_vec();
    let n = b.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let t = b[k + 1] * c;
            b[k] += t;
        }
    }
    b
}

impl GraphProblem {
    /// Largest `s` with `|c| + s <= 1` and `sum_k |b_k| s^k <= 1`, both
    /// with margin; the coefficient sum bounds `|F|` on the disk.
    fn radius(&self, c: C64) -> f64 {
        let s_max = 1.0 - BUILD_MARGIN - c.norm();
        if s_max <= 0.0 {
            return 0.0;
        }
        let b: Vec<f64> = shift(&self.coeffs, c).iter().map(|x| x.norm()).collect();
        let target = 1.0 - BUILD_MARGIN;
        let g = |s: f64| b.iter().rev().fold(0.0, |acc, x| acc * s + x);
        if g(0.0) >= target {
            return 0.0;
        }
        if g(s_max) <= target {
            return s_max;
        }
        let (mut lo, mut hi) = (0.0, s_max);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if g(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

impl Problem for GraphProblem {
    fn family(&self) -> DiskFamily {
        if self.hits.len() == 2 {
            DiskFamily::QuadraticPhi
        } else {
            DiskFamily::CubicGraph
        }
    }

    fn build(&self, c: C64) -> Option<DiskCandidate> {
        let s = self.radius(c);
        if s <= 0.0 {
            return None;
        }
        let base = (self.z.c1 - c) / s;
        let preimages: Vec<(usize, C64)> = self.hits.iter().map(|(j, x)| (*j, (x - c) / s)).collect();
        let ts: Vec<C64> = preimages.iter().map(|p| p.1).collect();
        let value = disk_bound_value(base, &ts)?;
        Some(DiskCandidate {
            family: self.family(),
            map: DiskMap::Graph {
                w_center: c,
                w_radius: s,
                coeffs: self.coeffs.clone(),
            },
            base,
            preimages,
            value,
        })
    }

    fn starts(&self) -> Vec<C64> {
        let mean = self.hits.iter().map(|h| h.1).sum::<C64>() / self.hits.len() as f64;
        vec![C64::new(0.0, 0.0), self.z.c1 * 0.5, mean, self.z.c1]
    }

    fn pole_indices(&self) -> Vec<usize> {
        self.hits.iter().map(|h| h.0).collect()
    }

    fn search_box(&self) -> (C64, f64) {
        (C64::new(0.0, 0.0), 1.0)
    }
}

fn line_problems(z: Complex2, poles: &[Complex2], max_poles: usize) -> Vec<Box<dyn Problem>> {
    let mut out: Vec<Box<dyn Problem>> = Vec::new();
    for (j, a) in poles.iter().enumerate() {
        let dir = *a - z;
        if dir.norm() == 0.0 {
            continue;
        }
        out.push(Box::new(LineProblem {
            z,
            dir,
            hits: vec![(j, C64::new(1.0, 0.0))],
        }));
        if max_poles < 2 {
            continue;
        }
        let mut hits = vec![(j, C64::new(1.0, 0.0))];
        for (k, b) in poles.iter().enumerate() {
            if k == j {
                continue;
            }
            let v = *b - z;
            if det(v, dir).norm() <= COLLINEAR_REL * v.norm() * dir.norm() {
                let t = hermitian_dot(v, dir) / dir.norm_sqr();
                if (z + dir * t - *b).norm() <= PREIMAGE_TOL * 0.1 {
                    hits.push((k, t));
                }
            }
        }
        hits.truncate(max_poles);
        // the line through z and the pole with the smallest index covers the rest
        if hits.len() >= 2 && hits.iter().all(|h| h.0 >= j) {
            out.push(Box::new(LineProblem { z, dir, hits }));
        }
    }
    out
}

fn graph_problems(z: Complex2, poles: &[Complex2], max_poles: usize) -> Vec<Box<dyn Problem>> {
    let n = poles.len();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            subsets.push(vec![i, j]);
            for k in j + 1..n {
                subsets.push(vec![i, j, k]);
            }
        }
    }
    subsets.sort_by_key(|s| s.len());
    let mut out: Vec<Box<dyn Problem>> = Vec::new();
    for s in subsets {
        if s.len() > max_poles || s.len() > 3 {
            continue;
        }
        let mut xs: Vec<C64> = s.iter().map(|&i| poles[i].c1).collect();
        let mut ys: Vec<C64> = s.iter().map(|&i| poles[i].c2).collect();
        xs.push(z.c1);
        ys.push(z.c2);
        let scale = xs.iter().map(|x| x.norm()).fold(1.0, f64::max);
        let separated = (0..xs.len()).all(|a| (a + 1..xs.len()).all(|b| (xs[a] - xs[b]).norm() > NODE_SEPARATION * scale));
        if !separated {
            continue;
        }
        let coeffs = interpolate(&xs, &ys);
        if coeffs.iter().any(|c| !c.is_finite()) {
            continue;
        }
        let hits = s.iter().map(|&i| (i, poles[i].c1)).collect();
        out.push(Box::new(GraphProblem { z, coeffs, hits }));
    }
    out
}

fn mix_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 step
    let mut x = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn problem_tag(p: &dyn Problem, hits: &[usize]) -> u64 {
    let mut tag = p.family() as u64 + 1;
    for h in hits {
        tag = tag * 7 + *h as u64 + 1;
    }
    tag
}

fn solve(
    p: &dyn Problem,
    hits: &[usize],
    cfg: &EnvelopeConfig,
    z: Complex2,
    poles: &[Complex2],
    stats: &mut EnvelopeSearch,
) -> Option<DiskCandidate> {
    let mut evaluated = 0usize;
    let mut objective = |x: &[f64]| {
        evaluated += 1;
        p.build(C64::new(x[0], x[1])).map_or(f64::INFINITY, |d| d.value)
    };
    let (center, half) = p.search_box();
    let bounds = Bounds {
        lower: vec![center.re - half, center.im - half],
        upper: vec![center.re + half, center.im + half],
    };
    let starts: Vec<Vec<f64>> = p.starts().iter().map(|c| vec![c.re, c.im]).collect();
    let runs = starts.len() + cfg.budget;
    let seed = mix_seed(cfg.seed, problem_tag(p, hits));
    let best = minimize_with_restarts(&mut objective, &starts, &bounds, runs, seed, &cfg.nelder_mead);
    stats.evaluated += evaluated;
    let best = best?;
    if !best.value.is_finite() {
        return None;
    }
    let cand = p.build(C64::new(best.x[0], best.x[1]))?;
    match cand.validate(z, poles) {
        Ok(()) => Some(cand),
        Err(_) => {
            stats.rejected += 1;
            None
        }
    }
}

/// Best disk bound at `z` for the given pole set over all candidate
/// families allowed by `cfg.max_poles`. Poles equal to an earlier pole
/// are dropped. Returns no candidate when nothing admissible is found.
pub fn search_envelope(z: Complex2, poles: &[Complex2], cfg: &EnvelopeConfig) -> Result<EnvelopeSearch> {
    if cfg.budget < 1 {
        return Err(Error::InvalidParameter("envelope budget must be at least 1"));
    }
    if !z.in_open_bidisk() {
        return Err(Error::OutOfDomain("z must lie in the open bidisk"));
    }
    let mut distinct: Vec<Complex2> = Vec::new();
    for p in poles {
        if !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.contains(&z) {
        return Err(Error::OutOfDomain("z is a pole"));
    }
    let mut problems = line_problems(z, &distinct, cfg.max_poles);
    if cfg.max_poles >= 2 {
        problems.extend(graph_problems(z, &distinct, cfg.max_poles));
    }
    let mut stats = EnvelopeSearch {
        best: None,
        evaluated: 0,
        rejected: 0,
    };
    for p in &problems {
        let hits = p.pole_indices();
        if let Some(cand) = solve(p.as_ref(), &hits, cfg, z, &distinct, &mut stats) {
            if stats.best.as_ref().is_none_or(|b| cand.value < b.value) {
                stats.best = Some(cand);
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let xs = [c(0.0, 0.0), c(1e-3, 0.0), c(5e-4, 1e-4), c(0.4, 0.1)];
        let ys = [c(0.0, 0.0), c(0.0, 0.0), c(1e-6, 0.0), c(0.3, -0.2)];
        let f = interpolate(&xs, &ys);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((horner(&f, *x) - y).norm() < 1e-14);
        }
    }

    #[test]
    fn shift_gives_taylor_coefficients() {
        let f = [c(1.0, 0.0), c(2.0, 1.0), c(0.0, 0.0), c(-1.0, 0.5)];
        let center = c(0.3, -0.2);
        let b = shift(&f, center);
        for w in [c(0.1, 0.0), c(-0.2, 0.3)] {
            assert!((horner(&b, w) - horner(&f, center + w)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_pole_matches_bidisk_green() {
        let z = Complex2::real(0.5, 0.3);
        let s = search_envelope(z, &[Complex2::ZERO; 3], &EnvelopeConfig::default()).unwrap();
        let best = s.best.unwrap();
        assert_abs_diff_eq!(best.value, libm::log(0.5), epsilon = 1e-6);
        assert!(best.value >= libm::log(0.5) - 1e-12);
        assert_eq!(best.family, DiskFamily::AffineOnePole);
    }

    #[test]
    fn single_pole_off_axis() {
        // one-pole bidisk Green function at the origin is log max |z_i|
        let z = Complex2::new(c(0.1, 0.2), c(-0.4, 0.3));
        let s = search_envelope(z, &[Complex2::ZERO], &EnvelopeConfig::default()).unwrap();
        assert_abs_diff_eq!(s.best.unwrap().value, libm::log(0.5), epsilon = 1e-6);
    }

    #[test]
    fn candidates_validate() {
        let poles = [Complex2::ZERO, Complex2::real(0.01, 0.0), Complex2::real(0.005, 0.005 * 0.1)];
        let z = Complex2::real(0.5, 0.2);
        let s = search_envelope(z, &poles, &EnvelopeConfig::default()).unwrap();
        let best = s.best.unwrap();
        best.validate(z, &poles).unwrap();
        assert_eq!(best.recompute_value(), Some(best.value));
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = EnvelopeConfig {
            budget: 0,
            ..Default::default()
        };
        assert!(search_envelope(Complex2::real(0.5, 0.2), &[Complex2::ZERO], &cfg).is_err());
        let cfg = EnvelopeConfig::default();
        assert!(matches!(
            search_envelope(Complex2::real(1.0, 0.2), &[Complex2::ZERO], &cfg),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            search_envelope(Complex2::ZERO, &[Complex2::ZERO], &cfg),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn collinear_poles_give_two_pole_lines() {
        // z on the line z2 = 0 through a1 and a2
        let poles = [Complex2::ZERO, Complex2::real(0.1, 0.0)];
        let z = Complex2::real(0.5, 0.0);
        let s = search_envelope(z, &poles, &EnvelopeConfig::default()).unwrap();
        let best = s.best.unwrap();
        assert_eq!(best.preimages.len(), 2);
        // the slice is the unit disk in z1: two-pole Green of the disk
        let exact = libm::log(0.5) + libm::log(mobius_involution(c(0.1, 0.0), c(0.5, 0.0)).norm());
        assert_abs_diff_eq!(best.value, exact, epsilon = 1e-6);
    }

    #[test]
    fn quadratic_graph_through_two_poles() {
        // the disk (w, delta w + lambda w (w - rho)) hits a1 and a3
        let (eps, rho, delta) = (0.01, 0.005, 0.1);
        let poles = [
            Complex2::ZERO,
            Complex2::real(eps, 0.0),
            Complex2::real(rho, delta * rho),
        ];
        let z = Complex2::real(0.5, 0.2);
        let problems = graph_problems(z, &poles, 2);
        assert_eq!(problems.len(), 3);
        let d = problems[1].build(c(0.0, 0.0)).unwrap();
        assert_eq!(d.family, DiskFamily::QuadraticPhi);
        d.validate(z, &poles).unwrap();
        if let DiskMap::Graph { coeffs, .. } = &d.map {
            let lambda = (0.2 - delta * 0.5) / (0.5 * (0.5 - rho));
            assert!((coeffs[1] - c(delta - lambda * rho, 0.0)).norm() < 1e-12);
            assert!((coeffs[2] - c(lambda, 0.0)).norm() < 1e-12);
        }
    }
}
