use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("apex direction is not contained in the region")]
    PNotInRegion,

    #[error("antipode of the apex direction lies in the region")]
    AntipodeInRegion,

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not satisfiable: {0}")]
    NotSatisfiable(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("truncation budget {budget:.3e} at t = {t} exceeds tolerance {tol:.3e}")]
    BudgetExceeded { t: f64, budget: f64, tol: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
