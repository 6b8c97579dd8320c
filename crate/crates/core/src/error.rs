use alloc::string::String;
use core::fmt;

/// Errors reported by the numerical kernels and the verification pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments was violated.
    InvalidArgument(String),
    /// An input matrix or sample contained NaN or infinite entries.
    NonFinite(String),
    /// The eigensolver did not converge.
    EigenvaluesFailed { dim: usize },
    /// The SVD did not converge.
    SingularValuesFailed { dim: usize },
    /// A contour sample was too close to zero to trust the phase.
    ZeroOnPath { min_abs: f64, floor: f64 },
    /// Consecutive phase steps stayed at or above the acceptance threshold
    /// after the refinement budget was spent.
    SamplingTooCoarse { max_step: f64 },
    /// A zero persisted on (or too near) the contour after jittering.
    BoundaryZero { retries: usize },
    /// An adaptive loop hit its budget before reaching the tolerance.
    /// `last` and `prev` are the final two iterates' values (magnitudes).
    BudgetExhausted {
        what: &'static str,
        budget: usize,
        last: f64,
        prev: f64,
    },
    /// Newton polishing stalled and the bisection fallback also failed.
    ZeroRefinementFailed { re: f64, im: f64 },
    /// A Blaschke factor was evaluated at one of its poles.
    PoleHit,
    /// Determinant zeros and the independent oracle disagree.
    OracleMismatch(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite values in {what}"),
            Error::EigenvaluesFailed { dim } => {
                write!(f, "eigensolver did not converge (dim {dim})")
            }
            Error::SingularValuesFailed { dim } => {
                write!(f, "SVD did not converge (dim {dim})")
            }
            Error::ZeroOnPath { min_abs, floor } => {
                write!(f, "zero on path: |f| = {min_abs:.3e} below floor {floor:.3e}")
            }
            Error::SamplingTooCoarse { max_step } => {
                write!(f, "sampling too coarse: max phase step {max_step:.3} rad")
            }
            Error::BoundaryZero { retries } => {
                write!(f, "zero on contour after {retries} jitter retries")
            }
            Error::BudgetExhausted { what, budget, last, prev } => write!(
                f,
                "{what} budget ({budget}) exhausted; last two iterates {last:.6e}, {prev:.6e}"
            ),
            Error::ZeroRefinementFailed { re, im } => {
                write!(f, "zero refinement stalled near {re:.6e}{im:+.6e}i")
            }
            Error::PoleHit => write!(f, "Blaschke product evaluated at a pole"),
            Error::OracleMismatch(msg) => write!(f, "oracle mismatch: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
