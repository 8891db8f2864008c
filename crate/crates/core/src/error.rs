use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve is not unit speed at alpha = {alpha}: |dx/dalpha| = {speed}")]
    NonUnitSpeed { alpha: f64, speed: f64 },

    #[error("curve has zero speed at s = {s}")]
    ZeroSpeed { s: f64 },

    #[error("degenerate frame at {at}: {reason}")]
    DegenerateFrame { at: f64, reason: String },

    #[error("metric is singular or not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("modes are not degenerate: energies {energies:?}")]
    NotDegenerate { energies: Vec<f64> },

    #[error("requested modes split a degenerate cluster: {0}")]
    DegeneracySplit(String),

    #[error("insufficient resolution: {0}")]
    ResolutionInsufficient(String),

    #[error("equivalent extrapotential forms disagree: {forms:?}")]
    FormMismatch { forms: Vec<f64> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator is not Hermitian: residual {residual:e}")]
    NonHermitianResidual { residual: f64 },

    #[error("unsupported tangent dimension m = {0}")]
    UnsupportedDimension(usize),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("tube of width {width} self-intersects near alpha = {alpha}")]
    SelfIntersection { width: f64, alpha: f64 },

    #[error("Fock truncation insufficient: lowest eigenvalues moved by {shift:e}")]
    TruncationInsufficient { shift: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
