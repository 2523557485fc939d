use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("collinear triple: normalized determinant {det:e} below threshold")]
    CollinearTriple { det: f64 },
    #[error("zero polynomial has no sup-norm")]
    ZeroPolynomial,
    #[error("point outside the open unit (bi)disk: {0}")]
    OutOfDomain(&'static str),
    #[error("no admissible analytic disk")]
    NoAdmissibleDisk,
    #[error("sandwich violation: upper {upper} below lower {lower}")]
    SandwichViolation { lower: f64, upper: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("classification is inconclusive; no limit target")]
    Inconclusive,
}
