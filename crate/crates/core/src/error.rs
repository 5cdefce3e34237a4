use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A radius or argument lies outside the radial domain of the space.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested quantity does not exist for this geometry.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    /// Problem parameters violate the admissible ranges.
    #[error("invalid parameters: {0}")]
    Parameter(String),
    /// Two fields or operators live on different grids.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A functional is undefined at the given input (e.g. W of the zero field).
    #[error("undefined value: {0}")]
    UndefinedValue(String),
    /// The shooting method could not bracket the ground-state amplitude.
    #[error("bracket error: {0}")]
    Bracket(String),
    /// A solve report cannot be used for the requested operation.
    #[error("invalid report: {0}")]
    InvalidReport(String),
    /// A profile does not satisfy its Euler-Lagrange equation closely enough.
    #[error("stale profile: Euler-Lagrange residual {residual:.3e} exceeds {gate:.1e}")]
    StaleProfile { residual: f64, gate: f64 },
    /// A direction violates the tangency constraint after projection.
    #[error("constraint error: {0}")]
    Constraint(String),
    /// An eigenvalue is too close to its neighbours for the requested check.
    #[error("degenerate eigenvalue: {0}")]
    Degeneracy(String),
    /// A solve stopped before meeting its convergence criteria.
    #[error("not converged: {0}")]
    NotConverged(String),
    /// An iterative method stalled or produced non-finite values.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Malformed or insufficient input data.
    #[error("input error: {0}")]
    Input(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for non-convergence, 4 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged(_) => 3,
            Error::UndefinedValue(_)
            | Error::Bracket(_)
            | Error::StaleProfile { .. }
            | Error::Degeneracy(_)
            | Error::Numerical(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
