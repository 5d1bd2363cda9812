use serde::Serialize;

use crate::error::{PricingError, Result};

/// Constant drift `r` and volatility `σ` of the gross return process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams {
    r: f64,
    sigma: f64,
}

impl MarketParams {
    pub fn new(r: f64, sigma: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(PricingError::invalid(format!(
                "rate r must be finite and nonnegative, got {r}"
            )));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(PricingError::invalid(format!(
                "volatility sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(Self { r, sigma })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.r, sigma)
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_non_finite() {
        assert!(MarketParams::new(-0.01, 0.2).is_err());
        assert!(MarketParams::new(0.05, -0.2).is_err());
        assert!(MarketParams::new(f64::NAN, 0.2).is_err());
        assert!(MarketParams::new(0.05, f64::INFINITY).is_err());
        assert!(MarketParams::new(0.0, 0.0).is_ok());
    }
}
