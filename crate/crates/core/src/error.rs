use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (min eigenvalue {min:e}, max eigenvalue {max:e})")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("symplectic spectrum error: {0}")]
    Spectrum(String),

    #[error("energy {energy} is not above the saddle energy {e0}")]
    BelowSaddle { energy: f64, e0: f64 },

    #[error("no positive root below {bound:e} for bath mode {mode}")]
    NoPositiveRoot { mode: usize, bound: f64 },

    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("effective hyperbolic rate {0} is not positive")]
    NonPositiveRate(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sampling failure: {0}")]
    SamplingFailure(String),

    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that come from the numerical domain of the inputs
    /// rather than from malformed files or arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::Spectrum(_)
                | Error::BelowSaddle { .. }
                | Error::NoPositiveRoot { .. }
                | Error::NonPositiveRate(_)
                | Error::Precondition(_)
                | Error::SamplingFailure(_)
                | Error::Divergence { .. }
        )
    }
}
