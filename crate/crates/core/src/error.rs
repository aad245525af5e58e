use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too small: {nodes} nodes, need at least {min}")]
    GridTooSmall { nodes: usize, min: usize },

    #[error("invalid grid length {0}")]
    InvalidLength(f64),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("derivative order {0} exceeds the supported maximum of 4")]
    OrderTooHigh(usize),

    #[error("multi-index {got:?} does not match a {dim}-dimensional grid")]
    MultiIndexDimension { got: Vec<usize>, dim: usize },

    #[error("unknown edge identifier `{0}`")]
    UnknownEdge(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("patch {index} does not fit inside the domain: {reason}")]
    PatchOutsideDomain { index: usize, reason: String },

    #[error("input distribution requires the smooth patch profile; heaviside steps have no strong derivative")]
    HeavisideDerivative,

    #[error("actuation point {position} is not on a grid node")]
    OffGridActuator { position: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix {0} is not positive semi-definite")]
    NotPositiveSemiDefinite(&'static str),

    #[error("matrix {0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("matrix {0} is not skew-symmetric")]
    NotSkewSymmetric(&'static str),

    #[error("rank-deficient least-squares system (singular values {0:?})")]
    RankDeficient(Vec<f64>),

    #[error("numerical blow-up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}
