//! Hermitian geometry in `C^2`: point triples, their angle invariants and the
//! orthonormal frame in which `a1 = 0`, `a2 = (eps, 0)`, `a3 = (rho, delta * rho)`.

use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result, C64};

/// Normalized determinants below this are treated as collinear.
pub const COLLINEAR_THRESHOLD: f64 = 1e-14;

/// Relative tolerance under which two pairwise distances count as tied.
pub const DISTANCE_TIE_REL: f64 = 1e-15;

/// A point (or vector) of `C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex2 {
    pub c1: C64,
    pub c2: C64,
}

impl Complex2 {
    pub const ZERO: Complex2 = Complex2 {
        c1: C64::new(0.0, 0.0),
        c2: C64::new(0.0, 0.0),
    };

    pub const fn new(c1: C64, c2: C64) -> Self {
        Self { c1, c2 }
    }

    /// Point with real coordinates.
    pub const fn real(x1: f64, x2: f64) -> Self {
        Self::new(C64::new(x1, 0.0), C64::new(x2, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        libm::hypot(self.c1.norm(), self.c2.norm())
    }

    /// `max(|c1|, |c2|)`, the norm whose unit ball is the bidisk.
    pub fn sup_norm(&self) -> f64 {
        self.c1.norm().max(self.c2.norm())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.c1 * s, self.c2 * s)
    }

    /// Inside the open unit bidisk.
    pub fn in_open_bidisk(&self) -> bool {
        self.c1.norm() < 1.0 && self.c2.norm() < 1.0
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.c1
            .re
            .total_cmp(&other.c1.re)
            .then(self.c1.im.total_cmp(&other.c1.im))
            .then(self.c2.re.total_cmp(&other.c2.re))
            .then(self.c2.im.total_cmp(&other.c2.im))
    }
}

impl Add for Complex2 {
    type Output = Complex2;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.c1 + rhs.c1, self.c2 + rhs.c2)
    }
}

impl Sub for Complex2 {
    type Output = Complex2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.c1 - rhs.c1, self.c2 - rhs.c2)
    }
}

impl Neg for Complex2 {
    type Output = Complex2;
    fn neg(self) -> Self {
        Self::new(-self.c1, -self.c2)
    }
}

impl Mul<C64> for Complex2 {
    type Output = Complex2;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for Complex2 {
    type Output = Complex2;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.c1 * rhs, self.c2 * rhs)
    }
}

/// `z1 * conj(w1) + z2 * conj(w2)`.
pub fn hermitian_dot(z: Complex2, w: Complex2) -> C64 {
    z.c1 * w.c1.conj() + z.c2 * w.c2.conj()
}

/// `det(u, v) = u1 v2 - u2 v1` in the standard basis.
pub fn det(u: Complex2, v: Complex2) -> C64 {
    u.c1 * v.c2 - u.c2 * v.c1
}

/// Chordal distance between the classes `[u]` and `[v]` in `CP^1`, i.e. the
/// sine of the angle between the complex lines they span.
pub fn chordal_distance(u: Complex2, v: Complex2) -> f64 {
    let scale = u.norm() * v.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (det(u, v).norm() / scale).clamp(0.0, 1.0)
}

/// Acute angle between the complex lines directed by `u` and `v`.
///
/// Equal to `acos(|u . conj v| / (|u| |v|))`; evaluated as
/// `atan2(|det|, |dot|)` so that angles near zero keep full relative
/// precision.
pub fn angle_between(u: Complex2, v: Complex2) -> Result<f64> {
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return Err(Error::DegenerateInput("zero direction vector"));
    }
    Ok(libm::atan2(det(u, v).norm(), hermitian_dot(u, v).norm()))
}

/// Three pairwise distinct points of `C^2`, numbered so that
/// `d3 >= d1 >= d2` and translated so that `a1 = 0`.
///
/// `d_i` is the distance between the two points other than `a_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTriple {
    a: [Complex2; 3],
    d: [f64; 3],
}

impl PointTriple {
    fn from_labelled(a1: Complex2, a2: Complex2, a3: Complex2) -> Result<Self> {
        let a = [Complex2::ZERO, a2 - a1, a3 - a1];
        let d = [(a[2] - a[1]).norm(), a[2].norm(), a[1].norm()];
        if d.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::DegenerateInput("coincident or non-finite points"));
        }
        Ok(Self { a, d })
    }

    /// Triple already expressed in a canonical frame:
    /// `(0,0)`, `(eps,0)`, `(rho, delta * rho)`.
    ///
    /// The point numbering is kept as given; [`PointTriple::is_ordered`]
    /// reports whether it also satisfies `d3 >= d1 >= d2`.
    pub fn frame_aligned(eps: f64, rho: C64, delta: C64) -> Result<Self> {
        Self::from_labelled(
            Complex2::ZERO,
            Complex2::new(C64::new(eps, 0.0), C64::new(0.0, 0.0)),
            Complex2::new(rho, delta * rho),
        )
    }

    pub fn a1(&self) -> Complex2 {
        self.a[0]
    }
    pub fn a2(&self) -> Complex2 {
        self.a[1]
    }
    pub fn a3(&self) -> Complex2 {
        self.a[2]
    }
    pub fn points(&self) -> [Complex2; 3] {
        self.a
    }
    /// `[d1, d2, d3]`.
    pub fn distances(&self) -> [f64; 3] {
        self.d
    }

    pub fn is_ordered(&self) -> bool {
        let [d1, d2, d3] = self.d;
        d3 >= d1 * (1.0 - DISTANCE_TIE_REL) && d1 >= d2 * (1.0 - DISTANCE_TIE_REL)
    }

    /// Image of the triple under `z -> u z` for a 2x2 matrix `u` (row-major).
    pub fn transformed(&self, u: [[C64; 2]; 2]) -> Result<Self> {
        let apply = |z: Complex2| {
            Complex2::new(u[0][0] * z.c1 + u[0][1] * z.c2, u[1][0] * z.c1 + u[1][1] * z.c2)
        };
        Self::from_labelled(apply(self.a[0]), apply(self.a[1]), apply(self.a[2]))
    }

    /// Classes `[a_i - a_j]` in `CP^1`, indexed by the missing point `k`.
    pub fn directions(&self) -> [Complex2; 3] {
        [self.a[1] - self.a[2], self.a[0] - self.a[2], self.a[0] - self.a[1]]
    }
}

/// Number the points so that `d3 >= d1 >= d2` and translate `a1` to the origin.
///
/// Ties within [`DISTANCE_TIE_REL`] are broken by taking the first valid
/// numbering of the points sorted lexicographically by
/// `(re c1, im c1, re c2, im c2)`.
pub fn canonicalize(p: Complex2, q: Complex2, r: Complex2) -> Result<PointTriple> {
    if !(p.is_finite() && q.is_finite() && r.is_finite()) {
        return Err(Error::DegenerateInput("non-finite coordinates"));
    }
    if p == q || q == r || p == r {
        return Err(Error::DegenerateInput("coincident points"));
    }
    let mut pts = [p, q, r];
    pts.sort_by(Complex2::lex_cmp);
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for [i, j, k] in PERMS {
        let t = PointTriple::from_labelled(pts[i], pts[j], pts[k])?;
        if t.is_ordered() {
            return Ok(t);
        }
    }
    // Some numbering always satisfies the exact ordering.
    unreachable!("no ordered numbering for three distinct points")
}

/// Acute angle between the lines directed by `a2` and `a3`.
pub fn acute_angle(t: &PointTriple) -> Result<f64> {
    angle_between(t.a2(), t.a3())
}

/// `|det(a2 / |a2|, a3 / |a3|)|`, which equals `sin(acute_angle)`.
pub fn normalized_det(t: &PointTriple) -> Result<f64> {
    let (n2, n3) = (t.a2().norm(), t.a3().norm());
    if n2 == 0.0 || n3 == 0.0 {
        return Err(Error::DegenerateInput("zero direction vector"));
    }
    Ok((det(t.a2(), t.a3()).norm() / (n2 * n3)).clamp(0.0, 1.0))
}

/// Orthonormal frame `(e1, e2)` with `a2 = (eps, 0)` and `a3 = (rho, delta * rho)`.
///
/// Phases: `e1 = a2 / |a2|` so `eps > 0`; the first non-negligible standard
/// coordinate of `e2` is real positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFrame {
    pub e1: Complex2,
    pub e2: Complex2,
    pub eps: f64,
    pub rho: C64,
    pub delta: C64,
}

impl CanonicalFrame {
    /// Frame with the standard basis and the given parameters.
    pub fn from_params(eps: f64, rho: C64, delta: C64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be finite and positive"));
        }
        if !(rho.is_finite() && delta.is_finite()) {
            return Err(Error::InvalidParameter("rho and delta must be finite"));
        }
        if rho.norm() == 0.0 {
            return Err(Error::DegenerateInput("rho vanishes"));
        }
        Ok(Self {
            e1: Complex2::real(1.0, 0.0),
            e2: Complex2::real(0.0, 1.0),
            eps,
            rho,
            delta,
        })
    }

    /// Coordinates of `z` in the frame: `(z . conj e1, z . conj e2)`.
    pub fn to_frame(&self, z: Complex2) -> Complex2 {
        Complex2::new(hermitian_dot(z, self.e1), hermitian_dot(z, self.e2))
    }

    /// Inverse of [`CanonicalFrame::to_frame`]: `w1 e1 + w2 e2`.
    pub fn from_frame(&self, w: Complex2) -> Complex2 {
        self.e1 * w.c1 + self.e2 * w.c2
    }

    /// `alpha[i][j] = e_j . conj(std_i)`, so that `z_i = sum_j alpha[i][j] w_j`.
    pub fn alpha(&self) -> [[C64; 2]; 2] {
        [[self.e1.c1, self.e2.c1], [self.e1.c2, self.e2.c2]]
    }

    /// The three poles in frame coordinates.
    pub fn poles(&self) -> [Complex2; 3] {
        [
            Complex2::ZERO,
            Complex2::new(C64::new(self.eps, 0.0), C64::new(0.0, 0.0)),
            Complex2::new(self.rho, self.delta * self.rho),
        ]
    }

    /// `delta / (rho - eps)`, the finite-`eps` value of the parabola parameter.
    pub fn m_value(&self) -> Result<C64> {
        let denom = self.rho - self.eps;
        if denom.norm() <= 1e-15 * self.eps {
            return Err(Error::DegenerateInput("rho equals eps"));
        }
        Ok(self.delta / denom)
    }
}

/// Gram-Schmidt frame of a non-collinear triple.
pub fn build_frame(t: &PointTriple) -> Result<CanonicalFrame> {
    let nd = normalized_det(t)?;
    if nd < COLLINEAR_THRESHOLD {
        return Err(Error::CollinearTriple { det: nd });
    }
    let (a2, a3) = (t.a2(), t.a3());
    let eps = a2.norm();
    let e1 = a2 * (1.0 / eps);
    let v2 = a3 - e1 * hermitian_dot(a3, e1);
    let mut e2 = v2 * (1.0 / v2.norm());
    let lead = if e2.c1.norm() > 1e-12 { e2.c1 } else { e2.c2 };
    e2 = e2 * (lead.conj() / lead.norm());
    let rho = hermitian_dot(a3, e1);
    if rho.norm() == 0.0 {
        return Err(Error::DegenerateInput("a3 orthogonal to a2; rho vanishes"));
    }
    let delta = hermitian_dot(a3, e2) / rho;
    Ok(CanonicalFrame {
        e1,
        e2,
        eps,
        rho,
        delta,
    })
}

/// Free-function form of [`CanonicalFrame::to_frame`].
pub fn to_frame(frame: &CanonicalFrame, z: Complex2) -> Complex2 {
    frame.to_frame(z)
}
