use thiserror::Error;

/// Errors raised by the numerical and measurement layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mesh cannot be built: {0}")]
    Mesh(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("gamma function evaluated within {distance:e} of a pole")]
    GammaPole { distance: f64 },

    #[error("discrete mass has imaginary residue {0:e}")]
    MassResidue(f64),

    #[error("relative mass drift {drift:e} at t = {time} exceeds bound {bound:e}")]
    MassDrift { drift: f64, time: f64, bound: f64 },

    #[error("region endpoint {0} is not a mesh node")]
    UnalignedEndpoint(f64),

    #[error("side carries too little mass to resolve ({fraction:e} of total)")]
    EmptySide { fraction: f64 },

    #[error("boundary contamination: mass {mass:e} within one unit of the boundary at t = {time}")]
    BoundaryContamination { mass: f64, time: f64 },

    #[error("phase undefined: |u(0,t)| = {modulus:e} at t = {time}")]
    PhaseUndefined { modulus: f64, time: f64 },

    #[error("phase jumps by {jump} between samples at t = {time}; sample more densely")]
    PhaseJump { jump: f64, time: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-positive deficit at v = {velocities:?}; log is undefined")]
    NonPositiveDeficit { velocities: Vec<f64> },

    #[error("values below the measurable floor e^-14 at v = {velocities:?}")]
    BelowFloor { velocities: Vec<f64> },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
