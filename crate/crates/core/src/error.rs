use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("map evaluation failed at a finite-difference stencil point: {0}")]
    StencilOutOfDomain(String),
    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Jacobian is rank deficient (rank {rank} < {rows})")]
    SingularJacobian { rank: usize, rows: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimError { expected: usize, got: usize },
    #[error("matrix logarithm undefined: {0}")]
    LogDomainError(String),
    #[error("matrix is not in the embedded Lie algebra (projection residual {0:e})")]
    NotInAlgebra(f64),
    #[error("point fails group membership for {group} (residual {residual:e})")]
    MembershipError { group: String, residual: f64 },
    #[error("factorization normalizes by a vanishing column norm")]
    DegenerateColumn,
    #[error("invariant violated: {what} (drift {drift:e})")]
    InvariantViolation { what: String, drift: f64 },
    #[error("function is not invariant along the group orbit (residual {0:e})")]
    NotInvariant(f64),
    #[error("base point is not invariant under left dressing (residual {0:e})")]
    NotDressingInvariant(f64),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("scenario invariant `{invariant}` fails at {index} (residual {residual:e})")]
    InvariantFailure {
        invariant: String,
        index: String,
        residual: f64,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
