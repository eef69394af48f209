use thiserror::Error;

/// Broad classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpucError {
    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter c = {c} is a non-positive integer inside the summation range")]
    PoleInParameter { c: f64 },
    #[error("invalid reflection data at index {index}: {reason}")]
    InvalidReflectionData { index: usize, reason: String },
    #[error("phi_{index}(0) vanishes; identity degenerates")]
    DegenerateReflection { index: usize },
    #[error("1 - conj(a) z is numerically zero")]
    PoleAtUnimodularProduct,
    #[error("grid of {m} points is too coarse for moments up to order {n}")]
    GridTooCoarse { m: usize, n: usize },
    #[error("matrix is singular (pivot {pivot} at step {step})")]
    SingularMatrix { step: usize, pivot: f64 },
    #[error("moment matrix is not positive definite at order {order}")]
    NotPositiveDefinite { order: usize },
    #[error("numerical breakdown at step {step}: {reason}")]
    NumericalBreakdown { step: usize, reason: String },
    #[error("integration approached the singularity 1 - r^2 = 0 at t = {t}")]
    SingularityApproached { t: f64 },
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("quadrature did not converge (drift {drift:e})")]
    QuadratureNotConverged { drift: f64 },
    #[error("root iteration did not converge (worst residual {worst_residual:e})")]
    NoConvergence { worst_residual: f64 },
    #[error("charges coincide (min distance {min_distance:e})")]
    CoincidentCharges { min_distance: f64 },
    #[error("A_n vanishes at a charge location")]
    PoleOfA,
    #[error("no ladder pair available for operator {0}")]
    NoLadderForOperator(String),
}

impl OpucError {
    pub fn kind(&self) -> ErrorKind {
        use OpucError::*;
        match self {
            ZeroLeadingCoefficient
            | Domain(_)
            | PoleInParameter { .. }
            | InvalidReflectionData { .. }
            | DegenerateReflection { .. }
            | PoleAtUnimodularProduct
            | GridTooCoarse { .. }
            | DegenerateParameters(_)
            | NoLadderForOperator(_) => ErrorKind::Domain,
            SingularMatrix { .. }
            | NotPositiveDefinite { .. }
            | NumericalBreakdown { .. }
            | SingularityApproached { .. }
            | QuadratureNotConverged { .. }
            | NoConvergence { .. }
            | CoincidentCharges { .. }
            | PoleOfA => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, OpucError>;
