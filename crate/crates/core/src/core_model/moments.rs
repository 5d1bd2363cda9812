use serde::Serialize;

use crate::error::{PricingError, Result};
use crate::quadrature::adaptive_simpson;

use super::closed_form::{y_closed_form, y_unchecked, z_closed_form, z_unchecked};
use super::{Horizon, MarketParams, TabulatedDensity};

const DENSITY_RTOL: f64 = 1e-10;
const JENSEN_SLACK: f64 = 1e-12;

/// `m1 = E J(T)` and `m2 = E J(T)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscountMoments {
    m1: f64,
    m2: f64,
}

impl DiscountMoments {
    /// Validates `m1 > 0` and `m2 >= m1²`. Values of `m2` below `m1²` by no
    /// more than rounding are lifted to `m1²`.
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1.is_finite() && m1 > 0.0) {
            return Err(PricingError::invalid(format!(
                "first moment must be finite and positive, got {m1}"
            )));
        }
        if !m2.is_finite() {
            return Err(PricingError::invalid(format!(
                "second moment must be finite, got {m2}"
            )));
        }
        let floor = m1 * m1;
        if m2 < floor * (1.0 - JENSEN_SLACK) {
            return Err(PricingError::invalid(format!(
                "second moment {m2} is below the squared mean {floor}"
            )));
        }
        Ok(Self {
            m1,
            m2: m2.max(floor),
        })
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn variance(&self) -> f64 {
        self.m2 - self.m1 * self.m1
    }

    /// `m1² / m2`, the ratio of the two relative payment rates.
    pub fn spread_ratio(&self) -> f64 {
        self.m1 * self.m1 / self.m2
    }
}

/// Moments of `J(T)` for a fixed or random horizon.
///
/// Random horizons are assumed independent of the market noise, so the
/// moments are `∫ y(t) λ(t) dt` and `∫ z(t) λ(t) dt`.
pub fn moments(params: &MarketParams, horizon: &Horizon) -> Result<DiscountMoments> {
    match horizon {
        Horizon::Fixed(t) => {
            DiscountMoments::new(y_closed_form(params, *t)?, z_closed_form(params, *t)?)
        }
        other => {
            let density = other
                .density()?
                .expect("non-fixed horizons always carry a density");
            density_moments(params, &density)
        }
    }
}

fn density_moments(params: &MarketParams, density: &TabulatedDensity) -> Result<DiscountMoments> {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (t0, t1, v0, v1) in density.segments() {
        if v0 == 0.0 && v1 == 0.0 {
            continue;
        }
        let slope = (v1 - v0) / (t1 - t0);
        let lambda = |t: f64| v0 + slope * (t - t0);
        m1 += adaptive_simpson(
            |t| y_unchecked(params, t) * lambda(t),
            t0,
            t1,
            DENSITY_RTOL,
            0.0,
        )?
        .value;
        // z may fall back to its own quadrature; surface those failures.
        let failure = std::cell::Cell::new(None);
        let second = adaptive_simpson(
            |t| match z_unchecked(params, t) {
                Ok(z) => z * lambda(t),
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            },
            t0,
            t1,
            DENSITY_RTOL,
            0.0,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        m2 += second?.value;
    }
    if !(m1.is_finite() && m2.is_finite()) {
        let (_, hi) = density.support();
        return Err(PricingError::Domain {
            quantity: "density moments",
            context: format!(
                "r={}, sigma={}, support up to {hi}",
                params.r(),
                params.sigma()
            ),
            magnitude: (3.0 * params.sigma() * params.sigma() - 2.0 * params.r()).abs() * hi,
        });
    }
    DiscountMoments::new(m1, m2)
}
