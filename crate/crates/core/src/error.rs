use thiserror::Error;

/// Errors raised by the model, state builders and the block engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JcmError {
    #[error("photon number {n} exceeds cutoff n_max = {n_max}")]
    OutOfRange { n: usize, n_max: usize },

    #[error("invalid cutoff: n_max must be at least 1 (got {0})")]
    InvalidCutoff(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("state is not normalized: norm^2 = {norm_sqr:.3e} deviates from 1 by more than {tol:.1e}")]
    NotNormalized { norm_sqr: f64, tol: f64 },

    #[error("dressed label ({0}, -) does not exist")]
    ForbiddenLabel(usize),

    #[error("cutoff too small: Poisson tail {tail:.3e} exceeds {bound:.1e} at n_max = {n_max}; need n_max >= {required}")]
    CutoffTooSmall {
        n_max: usize,
        required: usize,
        tail: f64,
        bound: f64,
    },

    #[error("operator does not conserve excitation number: max off-block magnitude {max_off_block:.3e}")]
    Structure { max_off_block: f64 },

    #[error("quadrature order too low: need at least {required_radial} radial and {required_angular} angular nodes (got {radial}, {angular})")]
    Quadrature {
        radial: usize,
        angular: usize,
        required_radial: usize,
        required_angular: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, JcmError>;
