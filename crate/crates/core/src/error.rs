use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("random regular pairing rejected {attempts} times; try a different seed")]
    PairingFailed { attempts: usize },

    #[error("{0} has no closed-form mean or noise statistics")]
    UnsupportedVariant(&'static str),

    #[error("graph is disconnected (lambda_2 = {lambda2:e})")]
    Disconnected { lambda2: f64 },

    #[error("state diverged at iteration {iteration} (|x| > 1e12)")]
    Diverged { iteration: usize },

    #[error("weight condition violated first at index {index}")]
    PreconditionViolated { index: usize },

    #[error("averaging time is unbounded (gamma_2 = {gamma2})")]
    Unbounded { gamma2: f64 },
}
