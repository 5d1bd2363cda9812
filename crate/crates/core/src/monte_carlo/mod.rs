//! Monte Carlo oracle for the moments of `J(T)` and the hedging error.

mod engine;
mod family;
mod sampling;
mod schedule;
mod stats;

use serde::Serialize;

use crate::error::{PricingError, Result};
use stats::PairMoments;

pub use engine::{
    hedging_error_distribution, simulate_j, simulate_j_extrapolated, HedgingErrorStats,
    QuantilePoint, HEDGING_QUANTILES,
};
pub use family::{simulate_constant_sigma_family, FamilyPoint};
pub use sampling::{sample_horizon, HorizonSampler};
pub use schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Time steps per year.
    pub n_steps: usize,
    pub seed: u64,
    /// Pair every path with its mirror image `-Z`.
    pub antithetic: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(PricingError::invalid(format!(
                "need at least 2 paths, got {}",
                self.n_paths
            )));
        }
        if self.n_steps < 1 {
            return Err(PricingError::invalid("need at least 1 step per year"));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(PricingError::invalid(format!(
                "antithetic sampling needs an even path count, got {}",
                self.n_paths
            )));
        }
        Ok(())
    }
}

/// Sample moments of `J(T)` and their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub second_moment: f64,
    /// Sample variance of the per-path values.
    pub variance: f64,
    pub std_error_mean: f64,
    pub std_error_second_moment: f64,
    /// Covariance between the `mean` and `second_moment` estimators.
    pub mean_second_covariance: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// Richardson-extrapolated over `n_steps` and `2·n_steps`.
    pub extrapolated: bool,
}

impl McEstimate {
    /// Standard errors come from `units` (antithetic pairs count as one unit);
    /// the variance comes from individual paths.
    pub(crate) fn from_moments(
        units: &PairMoments,
        paths: &PairMoments,
        cfg: &SimConfig,
        extrapolated: bool,
    ) -> Self {
        let n = units.n as f64;
        Self {
            mean: units.mean_x,
            second_moment: units.mean_y,
            variance: paths.var_x(),
            std_error_mean: (units.var_x() / n).sqrt(),
            std_error_second_moment: (units.var_y() / n).sqrt(),
            mean_second_covariance: units.cov_xy() / n,
            n_paths: cfg.n_paths,
            n_steps: cfg.n_steps,
            seed: cfg.seed,
            antithetic: cfg.antithetic,
            extrapolated,
        }
    }

    pub fn z_score_mean(&self, exact: f64) -> f64 {
        z_score(self.mean - exact, self.std_error_mean)
    }

    pub fn z_score_second_moment(&self, exact: f64) -> f64 {
        z_score(self.second_moment - exact, self.std_error_second_moment)
    }

    /// `m2 - m1²` and its delta-method standard error.
    pub fn residual_risk_price(&self) -> (f64, f64) {
        let (m1, m2) = (self.mean, self.second_moment);
        let grad = (-2.0 * m1, 1.0);
        (m2 - m1 * m1, self.delta_se(grad))
    }

    /// `1 - m1²/m2` (risk per unit price squared) and its delta-method standard error.
    pub fn residual_risk_payment(&self) -> (f64, f64) {
        let (m1, m2) = (self.mean, self.second_moment);
        let grad = (-2.0 * m1 / m2, m1 * m1 / (m2 * m2));
        (1.0 - m1 * m1 / m2, self.delta_se(grad))
    }

    fn delta_se(&self, (g1, g2): (f64, f64)) -> f64 {
        let var = g1 * g1 * self.std_error_mean.powi(2)
            + g2 * g2 * self.std_error_second_moment.powi(2)
            + 2.0 * g1 * g2 * self.mean_second_covariance;
        var.max(0.0).sqrt()
    }
}

/// Deviation in standard errors; exact agreement with zero spread scores 0.
pub fn z_score(deviation: f64, std_error: f64) -> f64 {
    if deviation == 0.0 {
        0.0
    } else {
        deviation / std_error
    }
}
