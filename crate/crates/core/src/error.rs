use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("process is not stationary (spectral radius {radius})")]
    NonStationary { radius: f64 },

    #[error("no lag k <= {kmax} with ||A^k|| <= {rho0}")]
    HorizonExceeded { kmax: usize, rho0: f64 },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("linear program infeasible: lambda {lambda} below best achievable residual {min_residual}")]
    Infeasible { lambda: f64, min_residual: f64 },

    #[error("LP solver failed: {0}")]
    Solver(String),

    #[error("tuning failed: {0}")]
    TuningFailed(String),

    #[error("bound violated for {design} at x = {x}: empirical {empirical} > bound {bound} + 3 * {stderr}")]
    BoundViolated {
        design: String,
        x: f64,
        empirical: f64,
        bound: f64,
        stderr: f64,
    },

    #[error("benchmark aborted: {failures} of {attempts} replications failed")]
    TooManyFailures { failures: usize, attempts: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
