use thiserror::Error;

/// Errors raised by series evaluation, state construction and the checks
/// built on top of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "series diverges: J = {j} is at or beyond the guard {guard} \
         (q = {q}, convergence radius {radius})"
    )]
    Divergence { j: f64, q: f64, radius: f64, guard: f64 },

    #[error(
        "series did not converge within {n_max} terms \
         (J = {j}, q = {q}, last tail bound {tail_bound:e})"
    )]
    NonConvergence { j: f64, q: f64, n_max: usize, tail_bound: f64 },

    #[error("range error: {0} overflowed the working precision")]
    Overflow(String),

    #[error("Jackson derivative is undefined at q = 1 unless the ordinary-derivative limit is requested")]
    DegenerateDeformation,

    #[error("states carry different deformations (q = {left} vs q = {right})")]
    IncompatibleStates { left: f64, right: f64 },

    #[error(
        "truncated Fock space of dimension {dim} is too small: \
         coefficient tail {tail:e} beyond index {from} exceeds {limit:e}"
    )]
    InsufficientTruncation { dim: usize, from: usize, tail: f64, limit: f64 },

    #[error("internal consistency check '{check}' failed: {lhs:e} vs {rhs:e}")]
    InternalConsistency { check: String, lhs: f64, rhs: f64 },

    #[error("no revival structure at q = 1: all periods beyond the classical one are infinite")]
    NoRevivalStructure,

    #[error("unknown column '{0}'")]
    UnknownColumn(String),
}

impl Error {
    /// True for failures of the numerics themselves (divergence, truncation,
    /// overflow), as opposed to bad input or a failed consistency check.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::NonConvergence { .. }
                | Error::Overflow(_)
                | Error::InsufficientTruncation { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn inconsistent(check: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Error::InternalConsistency { check: check.into(), lhs, rhs }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
