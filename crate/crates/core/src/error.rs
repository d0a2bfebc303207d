use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("singular matrix: pivot {pivot:e} in column {column} below threshold {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("eigenvalue iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("state component {index} is not strictly positive ({value:e})")]
    Domain { index: usize, value: f64 },

    #[error("evaluation at a pole of the stability function (z = {re} + {im}i)")]
    Pole { re: f64, im: f64 },

    #[error("limit undefined: {0}")]
    UndefinedLimit(String),

    #[error("stage guard violated: sigma[{index}] = {value:e} is not positive")]
    Guard { index: usize, value: f64 },

    #[error("inconsistent exponent: {0}")]
    Inconsistency(String),

    #[error("finite-difference step too large: perturbed component {index} = {value:e}")]
    StepSize { index: usize, value: f64 },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("steady state is underdetermined: stacked system has rank {rank} < {dim}")]
    Underdetermined { rank: usize, dim: usize },

    #[error("unknown test problem `{0}`")]
    UnknownProblem(String),

    #[error("cannot parse matrix: {0}")]
    MatrixParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad user input rather than by a failed numerical
    /// contract.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::Calibration(_)
                | Error::UnknownProblem(_)
                | Error::MatrixParse(_)
                | Error::Dimension(_)
        )
    }
}
