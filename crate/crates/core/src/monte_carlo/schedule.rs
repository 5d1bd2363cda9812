use serde::Serialize;

use crate::core_model::MarketParams;
use crate::error::{PricingError, Result};

/// Piecewise-constant drift and volatility.
///
/// Interval `i` is `[breakpoints[i], breakpoints[i + 1])`; the last interval
/// extends past any simulation horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    breakpoints: Vec<f64>,
    r_values: Vec<f64>,
    sigma_values: Vec<f64>,
}

impl Schedule {
    pub fn new(breakpoints: Vec<f64>, r_values: Vec<f64>, sigma_values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints[0] != 0.0 {
            return Err(PricingError::invalid("schedule must start at t = 0"));
        }
        if r_values.len() != breakpoints.len() || sigma_values.len() != breakpoints.len() {
            return Err(PricingError::invalid(format!(
                "schedule has {} breakpoints but {} rates and {} volatilities",
                breakpoints.len(),
                r_values.len(),
                sigma_values.len()
            )));
        }
        if breakpoints
            .windows(2)
            .any(|w| w[1] <= w[0] || !w[1].is_finite())
        {
            return Err(PricingError::invalid(
                "schedule breakpoints must be finite and strictly increasing",
            ));
        }
        for (&r, &s) in r_values.iter().zip(&sigma_values) {
            MarketParams::new(r, s)?;
        }
        Ok(Self {
            breakpoints,
            r_values,
            sigma_values,
        })
    }

    pub fn constant(params: &MarketParams) -> Self {
        Self {
            breakpoints: vec![0.0],
            r_values: vec![params.r()],
            sigma_values: vec![params.sigma()],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `(∫₀ᵗ r, ∫₀ᵗ σ²)`.
    pub fn integrals(&self, t: f64) -> (f64, f64) {
        let mut int_r = 0.0;
        let mut int_v = 0.0;
        for i in 0..self.breakpoints.len() {
            let start = self.breakpoints[i];
            if t <= start {
                break;
            }
            let end = self.breakpoints.get(i + 1).map_or(t, |&b| b.min(t));
            let s = self.sigma_values[i];
            int_r += self.r_values[i] * (end - start);
            int_v += s * s * (end - start);
        }
        (int_r, int_v)
    }

    /// Mean and standard deviation of the increment of `log B(·, 0)` over `[t0, t1]`.
    pub fn log_increment(&self, t0: f64, t1: f64) -> (f64, f64) {
        if self.breakpoints.len() == 1 {
            let (r, s) = (self.r_values[0], self.sigma_values[0]);
            let dt = t1 - t0;
            return ((r - 0.5 * s * s) * dt, s * dt.sqrt());
        }
        let (r0, v0) = self.integrals(t0);
        let (r1, v1) = self.integrals(t1);
        let var = (v1 - v0).max(0.0);
        (r1 - r0 - 0.5 * var, var.sqrt())
    }
}
