use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix does not have unit trace (trace = {trace})")]
    NotUnitTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue = {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    /// Bob's marginal is (near-)pure, so no canonical state exists.
    #[error("singular marginal (smallest eigenvalue = {min_eigenvalue:e})")]
    SingularMarginal { min_eigenvalue: f64 },

    #[error("{name} = {value} is outside its allowed range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("sampling failed after {attempts} attempts")]
    InternalSamplingFailure { attempts: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
