use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |rho - rho^dagger| = {0:.3e})")]
    NotHermitian(f64),

    #[error("unit trace violated: trace = {0}")]
    NotUnitTrace(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("state vector is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error(
        "filtering not possible: reduction on parties {parties:?} is rank deficient \
         (minimum eigenvalue {min_eigenvalue:.3e})"
    )]
    FilteringNotPossible {
        parties: Vec<usize>,
        min_eigenvalue: f64,
    },

    #[error("filtering did not converge after {iterations} sweeps (residual {residual:.3e})")]
    FilteringNotConverged { iterations: usize, residual: f64 },

    #[error("unsupported criterion: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
