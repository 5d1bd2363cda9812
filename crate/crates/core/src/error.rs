use thiserror::Error;

pub type Result<T, E = PricingError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    /// Caller supplied an argument outside the accepted domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A closed form left the range of `f64`.
    #[error("{quantity} is not finite for {context} (exponent magnitude {magnitude:e})")]
    Domain {
        quantity: &'static str,
        context: String,
        magnitude: f64,
    },

    #[error(
        "quadrature did not converge: achieved relative error {achieved:e}, target {target:e}"
    )]
    Quadrature { achieved: f64, target: f64 },

    #[error(
        "no sign change on implied-volatility bracket [{low}, {high}]: \
         residual {residual_low:e} at low end, {residual_high:e} at high end"
    )]
    InversionInfeasible {
        low: f64,
        high: f64,
        residual_low: f64,
        residual_high: f64,
    },

    #[error("residual is not monotone on the implied-volatility bracket near sigma = {sigma}")]
    NonMonotone { sigma: f64 },

    #[error("simulation produced a non-finite value at step {step} of path {path}")]
    Simulation { path: usize, step: usize },

    #[error("life table row {row}: {message}")]
    Parse { row: usize, message: String },
}

impl PricingError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PricingError::InvalidInput(msg.into())
    }

    /// True for errors caused by the caller's arguments rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            PricingError::InvalidInput(_) | PricingError::Parse { .. }
        )
    }
}
