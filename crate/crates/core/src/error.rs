use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parameter regime not admissible: {0}")]
    Regime(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    NonConvergence { a: f64, b: f64, error: f64 },

    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },

    #[error("step size underflow at r = {at}")]
    StepUnderflow { at: f64 },

    #[error("solution blew up at r = {at}")]
    BlowUp { at: f64 },

    #[error("gradient degenerated to zero at r = {at}")]
    DegenerateGradient { at: f64 },

    #[error("no sign change in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("insufficient samples: need {needed}, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("samples change sign inside the fit window")]
    SignChange,

    #[error("ratio sequence is not Cauchy (spread {spread:e})")]
    Divergent { spread: f64 },

    #[error("conflicting classifications: {0}")]
    ConflictingFits(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for errors caused by the numerical path rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::NonFinite { .. }
                | Error::StepUnderflow { .. }
                | Error::BlowUp { .. }
                | Error::DegenerateGradient { .. }
                | Error::Divergent { .. }
        )
    }
}
