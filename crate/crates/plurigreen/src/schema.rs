//! Serializable mirrors of the core types.
//!
//! Complex numbers are `{re, im}` records, polynomials are lists of
//! `{j, k, re, im}` terms, and enums carry a `kind` tag. Values that can be
//! infinite go through [`Real`], which writes non-finite numbers as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use plurigreen_core::bipoly::{BiPoly, SupNormResult};
use plurigreen_core::classify::{Classification, Evidence, FamilySpec, FamilyWarning, Regime};
use plurigreen_core::cxgeom::{canonicalize, CanonicalFrame, Complex2};
use plurigreen_core::green::{BoundKind, Certificate, DiskFamily, DiskMap, GreenBound, PolyLabel};
use plurigreen_core::ideals::{Coordinates, IdealLabel, IdealPresentation, IdealWarning};
use plurigreen_core::C64;

/// A float that survives JSON even when infinite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Real(pub f64);

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real(x)
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexRecord {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<C64> for ComplexRecord {
    fn from(c: C64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<ComplexRecord> for C64 {
    fn from(c: ComplexRecord) -> Self {
        C64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub z1: ComplexRecord,
    pub z2: ComplexRecord,
}

impl From<Complex2> for PointRecord {
    fn from(z: Complex2) -> Self {
        Self {
            z1: z.c1.into(),
            z2: z.c2.into(),
        }
    }
}

impl From<PointRecord> for Complex2 {
    fn from(p: PointRecord) -> Self {
        Complex2::new(p.z1.into(), p.z2.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub j: u32,
    pub k: u32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyRecord(pub Vec<TermRecord>);

impl From<&BiPoly> for PolyRecord {
    fn from(p: &BiPoly) -> Self {
        PolyRecord(
            p.terms()
                .map(|(j, k, c)| TermRecord { j, k, re: c.re, im: c.im })
                .collect(),
        )
    }
}

impl From<&PolyRecord> for BiPoly {
    fn from(p: &PolyRecord) -> Self {
        BiPoly::from_terms(p.0.iter().map(|t| (t.j, t.k, C64::new(t.re, t.im))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub eps: f64,
    pub rho: ComplexRecord,
    pub delta: ComplexRecord,
    pub e1: PointRecord,
    pub e2: PointRecord,
}

impl From<&CanonicalFrame> for FrameRecord {
    fn from(f: &CanonicalFrame) -> Self {
        Self {
            eps: f.eps,
            rho: f.rho.into(),
            delta: f.delta.into(),
            e1: f.e1.into(),
            e2: f.e2.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdealLabelRecord {
    TripleIdeal,
    CompleteIntersectionLimit { m: ComplexRecord },
    MaximalSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdealWarningRecord {
    IllConditioned { coefficient: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealRecord {
    pub label: IdealLabelRecord,
    /// `"frame"` or `"standard"`.
    pub coordinates: String,
    pub generators: Vec<PolyRecord>,
    pub warnings: Vec<IdealWarningRecord>,
}

impl From<&IdealPresentation> for IdealRecord {
    fn from(p: &IdealPresentation) -> Self {
        let label = match p.label {
            IdealLabel::TripleIdeal => IdealLabelRecord::TripleIdeal,
            IdealLabel::CompleteIntersectionLimit { m } => IdealLabelRecord::CompleteIntersectionLimit { m: m.into() },
            IdealLabel::MaximalSquare => IdealLabelRecord::MaximalSquare,
        };
        let coordinates = match p.coordinates {
            Coordinates::Frame => "frame",
            Coordinates::Standard => "standard",
        };
        Self {
            label,
            coordinates: coordinates.to_string(),
            generators: p.generators.iter().map(PolyRecord::from).collect(),
            warnings: p
                .warnings
                .iter()
                .map(|w| match *w {
                    IdealWarning::IllConditioned { coefficient } => IdealWarningRecord::IllConditioned { coefficient },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub eps: f64,
    pub points: [PointRecord; 3],
}

/// Family of shrinking triples as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyRecord {
    PowerLaw {
        rho_coeff: ComplexRecord,
        rho_exp: f64,
        delta_coeff: ComplexRecord,
        delta_exp: f64,
    },
    SampleTable { samples: Vec<SampleRecord> },
}

impl FamilyRecord {
    pub fn to_spec(&self) -> plurigreen_core::Result<FamilySpec> {
        Ok(match self {
            FamilyRecord::PowerLaw {
                rho_coeff,
                rho_exp,
                delta_coeff,
                delta_exp,
            } => FamilySpec::PowerLaw {
                rho_coeff: (*rho_coeff).into(),
                rho_exp: *rho_exp,
                delta_coeff: (*delta_coeff).into(),
                delta_exp: *delta_exp,
            },
            FamilyRecord::SampleTable { samples } => FamilySpec::SampleTable(
                samples
                    .iter()
                    .map(|s| {
                        let [p, q, r] = s.points.map(Complex2::from);
                        Ok((s.eps, canonicalize(p, q, r)?))
                    })
                    .collect::<plurigreen_core::Result<_>>()?,
            ),
        })
    }
}

impl From<&FamilySpec> for FamilyRecord {
    fn from(f: &FamilySpec) -> Self {
        match f {
            FamilySpec::PowerLaw {
                rho_coeff,
                rho_exp,
                delta_coeff,
                delta_exp,
            } => FamilyRecord::PowerLaw {
                rho_coeff: (*rho_coeff).into(),
                rho_exp: *rho_exp,
                delta_coeff: (*delta_coeff).into(),
                delta_exp: *delta_exp,
            },
            FamilySpec::SampleTable(rows) => FamilyRecord::SampleTable {
                samples: rows
                    .iter()
                    .map(|(eps, t)| SampleRecord {
                        eps: *eps,
                        points: t.points().map(PointRecord::from),
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeRecord {
    CompleteIntersection { m: ComplexRecord },
    MaxSquareDegenerate,
    MaxSquareGeneric,
    Inconclusive,
}

impl From<&Regime> for RegimeRecord {
    fn from(r: &Regime) -> Self {
        match *r {
            Regime::CompleteIntersection { m } => RegimeRecord::CompleteIntersection { m: m.into() },
            Regime::MaxSquareDegenerate => RegimeRecord::MaxSquareDegenerate,
            Regime::MaxSquareGeneric => RegimeRecord::MaxSquareGeneric,
            Regime::Inconclusive => RegimeRecord::Inconclusive,
        }
    }
}

impl From<RegimeRecord> for Regime {
    fn from(r: RegimeRecord) -> Self {
        match r {
            RegimeRecord::CompleteIntersection { m } => Regime::CompleteIntersection { m: m.into() },
            RegimeRecord::MaxSquareDegenerate => Regime::MaxSquareDegenerate,
            RegimeRecord::MaxSquareGeneric => Regime::MaxSquareGeneric,
            RegimeRecord::Inconclusive => Regime::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyWarningRecord {
    RhoExponentBelowOne { rho_exp: f64 },
    RhoCoefficientTooLarge { rho_coeff: f64 },
    DeltaNotVanishing { delta_exp: f64 },
}

impl From<&FamilyWarning> for FamilyWarningRecord {
    fn from(w: &FamilyWarning) -> Self {
        match *w {
            FamilyWarning::RhoExponentBelowOne { rho_exp } => FamilyWarningRecord::RhoExponentBelowOne { rho_exp },
            FamilyWarning::RhoCoefficientTooLarge { rho_coeff } => {
                FamilyWarningRecord::RhoCoefficientTooLarge { rho_coeff }
            }
            FamilyWarning::DeltaNotVanishing { delta_exp } => FamilyWarningRecord::DeltaNotVanishing { delta_exp },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceRecord {
    pub eps: Vec<f64>,
    pub m: Vec<ComplexRecord>,
    pub crit: Vec<Real>,
    pub crit_cross_check: Vec<Real>,
    pub direction_gaps: Vec<Real>,
    pub direction_moves: Vec<Real>,
    pub crit_slope: Real,
    pub crit_to_zero: bool,
    pub m_converges: bool,
    pub m_diverges: bool,
    pub m_extrapolated: Option<ComplexRecord>,
    pub directions_split: bool,
    pub directions_converge: bool,
    pub contradiction: bool,
    pub equivalence_holds: Option<bool>,
    pub family_warnings: Vec<FamilyWarningRecord>,
}

impl From<&Evidence> for EvidenceRecord {
    fn from(e: &Evidence) -> Self {
        Self {
            eps: e.eps.clone(),
            m: e.m.iter().map(|&m| m.into()).collect(),
            crit: reals(&e.crit),
            crit_cross_check: reals(&e.crit_cross_check),
            direction_gaps: reals(&e.direction_gaps),
            direction_moves: reals(&e.direction_moves),
            crit_slope: Real(e.crit_slope),
            crit_to_zero: e.crit_to_zero,
            m_converges: e.m_converges,
            m_diverges: e.m_diverges,
            m_extrapolated: e.m_extrapolated.map(Into::into),
            directions_split: e.directions_split,
            directions_converge: e.directions_converge,
            contradiction: e.contradiction,
            equivalence_holds: e.equivalence_holds(),
            family_warnings: e.family_warnings.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationRecord {
    pub regime: RegimeRecord,
    pub evidence: EvidenceRecord,
}

impl From<&Classification> for ClassificationRecord {
    fn from(c: &Classification) -> Self {
        Self {
            regime: (&c.regime).into(),
            evidence: (&c.evidence).into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupNormRecord {
    pub value: f64,
    pub lower_witness: PointRecord,
    pub uncertainty: f64,
    pub resolution: usize,
}

impl From<&SupNormResult> for SupNormRecord {
    fn from(s: &SupNormResult) -> Self {
        Self {
            value: s.value,
            lower_witness: s.lower_witness.into(),
            uncertainty: s.uncertainty,
            resolution: s.resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiskMapRecord {
    Affine {
        center: PointRecord,
        direction: PointRecord,
    },
    Graph {
        w_center: ComplexRecord,
        w_radius: f64,
        coeffs: Vec<ComplexRecord>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreimageRecord {
    pub pole: usize,
    pub zeta: ComplexRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertificateRecord {
    Polynomial {
        /// `q1`, `q2`, `q3`, `line_product` or `custom`.
        label: String,
        order: u32,
        norm: SupNormRecord,
        poly: PolyRecord,
    },
    Disk {
        /// `affine_one_pole`, `affine_two_pole`, `quadratic_phi` or `cubic_graph`.
        family: String,
        map: DiskMapRecord,
        base: ComplexRecord,
        preimages: Vec<PreimageRecord>,
        value: Real,
    },
    TwoPoint {
        eps: f64,
        fallback: bool,
    },
    LimitFormula {
        m: ComplexRecord,
    },
    Reference {
        max_square: Real,
        three_halves: Real,
        hypothesis: String,
    },
}

pub fn poly_label_name(l: PolyLabel) -> &'static str {
    match l {
        PolyLabel::Q1 => "q1",
        PolyLabel::Q2 => "q2",
        PolyLabel::Q3 => "q3",
        PolyLabel::LineProduct => "line_product",
        PolyLabel::Custom => "custom",
    }
}

fn disk_family_name(f: DiskFamily) -> &'static str {
    match f {
        DiskFamily::AffineOnePole => "affine_one_pole",
        DiskFamily::AffineTwoPole => "affine_two_pole",
        DiskFamily::QuadraticPhi => "quadratic_phi",
        DiskFamily::CubicGraph => "cubic_graph",
    }
}

impl From<&Certificate> for CertificateRecord {
    fn from(c: &Certificate) -> Self {
        match c {
            Certificate::Polynomial {
                label,
                poly,
                order,
                norm,
            } => CertificateRecord::Polynomial {
                label: poly_label_name(*label).to_string(),
                order: *order,
                norm: norm.into(),
                poly: poly.into(),
            },
            Certificate::Disk(d) => CertificateRecord::Disk {
                family: disk_family_name(d.family).to_string(),
                map: match &d.map {
                    DiskMap::Affine { center, direction } => DiskMapRecord::Affine {
                        center: (*center).into(),
                        direction: (*direction).into(),
                    },
                    DiskMap::Graph {
                        w_center,
                        w_radius,
                        coeffs,
                    } => DiskMapRecord::Graph {
                        w_center: (*w_center).into(),
                        w_radius: *w_radius,
                        coeffs: coeffs.iter().map(|&c| c.into()).collect(),
                    },
                },
                base: d.base.into(),
                preimages: d
                    .preimages
                    .iter()
                    .map(|&(pole, zeta)| PreimageRecord {
                        pole,
                        zeta: zeta.into(),
                    })
                    .collect(),
                value: Real(d.value),
            },
            Certificate::TwoPoint { eps, fallback } => CertificateRecord::TwoPoint {
                eps: *eps,
                fallback: *fallback,
            },
            Certificate::LimitFormula { m } => CertificateRecord::LimitFormula { m: (*m).into() },
            Certificate::Reference {
                max_square,
                three_halves,
                hypothesis,
            } => CertificateRecord::Reference {
                max_square: Real(*max_square),
                three_halves: Real(*three_halves),
                hypothesis: hypothesis.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRecord {
    /// `lower`, `upper`, `exact_limit` or `reference_value`.
    pub kind: String,
    pub value: Real,
    pub certificate: CertificateRecord,
}

pub fn bound_kind_name(k: BoundKind) -> &'static str {
    match k {
        BoundKind::Lower => "lower",
        BoundKind::Upper => "upper",
        BoundKind::ExactLimit => "exact_limit",
        BoundKind::ReferenceValue => "reference_value",
    }
}

impl From<&GreenBound> for BoundRecord {
    fn from(b: &GreenBound) -> Self {
        Self {
            kind: bound_kind_name(b.kind).to_string(),
            value: Real(b.value),
            certificate: (&b.certificate).into(),
        }
    }
}
