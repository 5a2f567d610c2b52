use thiserror::Error;

use crate::Complex64;

/// Errors raised by the interpolation, entropy and Szegő machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("input is not Hermitian: {0}")]
    NonHermitianInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "Toeplitz matrix S is numerically singular (smallest/largest singular value = {ratio:.3e})"
    )]
    SingularS { ratio: f64 },

    #[error("inertia is ambiguous: eigenvalue {eigenvalue:.3e} within {threshold:.3e} of zero")]
    AmbiguousInertia { eigenvalue: f64, threshold: f64 },

    #[error("last block row Y of S^-1 Pi is rank deficient (rank {rank} < {p})")]
    RankDeficientY { rank: usize, p: usize },

    #[error("parameter evaluation failed at z = {z}: {reason}")]
    EvaluationFailure { z: Complex64, reason: String },

    #[error("nondegeneracy tests disagree: at 2i = {upper}, at -2i = {lower}")]
    InconsistentConditions { upper: bool, lower: bool },

    #[error("parameter is degenerate for this instance: {0}")]
    DegenerateParameter(String),

    #[error("point z = {z} hits the pole of the resolvent (1/z in sigma(A))")]
    PoleHit { z: Complex64 },

    #[error("parameter has a pole near z = {z}")]
    PoleProximity { z: Complex64 },

    #[error("boundary pole at lambda = {lambda}")]
    BoundaryPole { lambda: Complex64 },

    #[error("frame U(z) has a pole at z = {z}")]
    FramePole { z: Complex64 },

    #[error("linear fractional denominator is singular at z = {z}")]
    DenominatorSingular { z: Complex64 },

    #[error("solution has a pole at lambda = {lambda}")]
    SolutionPole { lambda: Complex64 },

    #[error("contraction pair is singular (P-hat not invertible)")]
    SingularPhat,

    #[error("not a strict contraction: largest singular value {norm:.6}")]
    NotContractive { norm: f64 },

    #[error("pole inside extraction radius {radius}")]
    PoleInsideRadius { radius: f64 },

    #[error("Taylor extraction did not converge: two-radius disagreement {discrepancy:.3e}")]
    NonConvergent { discrepancy: f64 },

    #[error(
        "Taylor coefficient {index} does not match the data (relative residual {residual:.3e})"
    )]
    CoefficientMismatch { index: usize, residual: f64 },

    #[error("boundary density is negative on a set of positive measure (det = {det:.3e} at theta = {theta:.6})")]
    NonIntegrable { theta: f64, det: f64 },

    #[error("quadrature stalled: error estimate {estimate:.3e} after {nodes} nodes")]
    NoConvergence { estimate: f64, nodes: usize },

    #[error("zero on the contour near lambda = {lambda}")]
    ZeroOnContour { lambda: Complex64 },

    #[error("zero finder count mismatch: winding number {winding}, located {located}")]
    CountMismatch { winding: usize, located: usize },

    #[error("determinant sequence broke down at i = {index}: {reason}")]
    ConditioningBreakdown { index: usize, reason: String },

    #[error("instance generation exhausted after {attempts} attempts")]
    GenerationExhausted { attempts: usize },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
