use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested beamsplitter lies outside the family 0 <= phi <= pi/4.
    #[error("out of family: {0}")]
    OutOfFamily(String),

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})"
    )]
    Convergence { sweeps: usize, residual: f64 },

    /// A truncation needs more photons than the configured ceiling allows.
    #[error("resource limit: need {required} photons but ceiling is {ceiling}; raise the ceiling or loosen the tail tolerance")]
    Resource { required: usize, ceiling: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by numerical budgets rather than bad input.
    pub fn is_numerical_resource(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Resource { .. })
    }
}
