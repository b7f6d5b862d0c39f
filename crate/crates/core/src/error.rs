use thiserror::Error;

/// Errors raised by the algebraic and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator pool mismatch: {left} pairs vs {right} pairs")]
    PoolMismatch { left: u32, right: u32 },
    #[error("generator index {index} outside pool of {pairs} pairs")]
    GeneratorOutOfRange { index: u32, pairs: u32 },
    #[error("pool of {0} pairs exceeds the 32-pair limit")]
    PoolTooLarge(u32),
    #[error("conjugation conventions mixed within one expression")]
    ConventionMix,
    #[error("element is not even")]
    NotEven,
    #[error("function undefined at body value {0}")]
    Domain(String),
    #[error("series needs {needed} derivatives, {given} supplied")]
    InsufficientDerivatives { needed: usize, given: usize },
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("singular block: {0}")]
    SingularBlock(String),
    #[error("divergent Gaussian integral: {0}")]
    Divergence(String),
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("grid resolution insufficient: {0}")]
    Resolution(String),
    #[error("numerical differentiation unstable: {0}")]
    Differentiation(String),
    #[error("statistical error too large: {0}")]
    Statistics(String),
    #[error("unfolding failed: {0}")]
    Unfolding(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("singular initial condition: {0}")]
    Singularity(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
