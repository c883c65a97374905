use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or grid is unusable (schema-level problem).
    #[error("configuration error: {0}")]
    Config(String),

    /// A physical invariant of the inputs or outputs is violated.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Adaptive quadrature failed to reach its tolerance.
    #[error(
        "quadrature did not converge on [{lo}, {hi}]: estimated error {estimate:e} \
         exceeds {tolerance:e} after {evaluations} evaluations"
    )]
    Quadrature { lo: f64, hi: f64, estimate: f64, tolerance: f64, evaluations: usize },

    /// The per-frequency linear system is numerically singular.
    #[error("singular system at nu = {nu}: reciprocal condition {rcond:e}")]
    Singular { nu: f64, rcond: f64 },

    /// An iterative solver ran out of iterations.
    #[error("no convergence after {iterations} iterations (last step {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Coarse error category, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Invariant,
    Numerics,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Domain(_) | Error::Invariant(_) => ErrorKind::Invariant,
            Error::Quadrature { .. } | Error::Singular { .. } | Error::NoConvergence { .. } => ErrorKind::Numerics,
        }
    }

    /// Process exit code: 2 configuration, 3 invariant, 4 numerics.
    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Invariant => 3,
            ErrorKind::Numerics => 4,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_kind() {
        assert_eq!(Error::config("x").exit_code(), 2);
        assert_eq!(Error::domain("x").exit_code(), 3);
        assert_eq!(Error::invariant("x").exit_code(), 3);
        assert_eq!(Error::Singular { nu: 1.0, rcond: 0.0 }.exit_code(), 4);
        assert_eq!(Error::NoConvergence { iterations: 1, residual: 1.0 }.exit_code(), 4);
        let q = Error::Quadrature { lo: 0.0, hi: 1.0, estimate: 1.0, tolerance: 0.1, evaluations: 9 };
        assert_eq!(q.exit_code(), 4);
    }
}
