//! First and second moments of `J(T) = ∫₀ᵀ B(s,0)⁻¹ ds` for constant `r`, `σ`.
//!
//! With `α = σ² - r` and `β = 2σ² - r`,
//!
//! ```text
//! y(T) = E J(T)    = g(α, T)
//! z(T) = E J(T)²   = 2 (g(α + β, T) - g(α, T)) / β
//!                  = 2 ∫₀ᵀ e^{αt} g(β, t) dt
//! ```
//!
//! where `g(α, T) = (e^{αT} - 1) / α` with `g(0, T) = T`. The raw formulas
//! are 0/0 at `r = σ²`, `2r = 3σ²` (both absorbed by `g`) and `r = 2σ²`
//! (handled by switching to the integral form).

use crate::error::{PricingError, Result};
use crate::quadrature::adaptive_simpson;

use super::MarketParams;

/// Below this value of `|r - 2σ²|·T` the divided difference in `z` loses too
/// many digits and the integral form is used instead.
const Z_SERIES_SWITCH: f64 = 1e-6;
const Z_QUADRATURE_RTOL: f64 = 1e-13;

/// `(e^{αT} - 1) / α`, continuous through `α = 0` where it equals `T`.
pub fn growth_integral(alpha: f64, t: f64) -> f64 {
    let x = alpha * t;
    if x == 0.0 {
        t
    } else {
        t * (x.exp_m1() / x)
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if !t.is_finite() || t <= 0.0 {
        return Err(PricingError::invalid(format!(
            "horizon T must be finite and positive, got {t}"
        )));
    }
    Ok(())
}

fn finite(quantity: &'static str, value: f64, params: &MarketParams, t: f64) -> Result<f64> {
    if value.is_finite() {
        return Ok(value);
    }
    let s2 = params.sigma() * params.sigma();
    let magnitude = [s2 - params.r(), 3.0 * s2 - 2.0 * params.r()]
        .iter()
        .map(|a| (a * t).abs())
        .fold(0.0, f64::max);
    Err(PricingError::Domain {
        quantity,
        context: format!("r={}, sigma={}, T={}", params.r(), params.sigma(), t),
        magnitude,
    })
}

/// `E J(T)` for a fixed horizon.
pub fn y_closed_form(params: &MarketParams, t: f64) -> Result<f64> {
    check_horizon(t)?;
    finite("y(T)", y_unchecked(params, t), params, t)
}

/// `E J(T)²` for a fixed horizon.
pub fn z_closed_form(params: &MarketParams, t: f64) -> Result<f64> {
    check_horizon(t)?;
    z_unchecked(params, t).and_then(|v| finite("z(T)", v, params, t))
}

/// `E J(T)²` by adaptive quadrature of `2 ∫₀ᵀ e^{(σ²-r)t} g(2σ²-r, t) dt`.
///
/// Singularity-free for all parameters; used as the fallback near
/// `r = 2σ²` and as an independent check on the closed form.
pub fn z_by_quadrature(params: &MarketParams, t: f64) -> Result<f64> {
    check_horizon(t)?;
    z_integral(params, t).and_then(|v| finite("z(T)", v, params, t))
}

pub(crate) fn y_unchecked(params: &MarketParams, t: f64) -> f64 {
    let s2 = params.sigma() * params.sigma();
    growth_integral(s2 - params.r(), t)
}

/// Accepts `t = 0` (returns 0); used inside density integrals.
pub(crate) fn z_unchecked(params: &MarketParams, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if params.is_deterministic() {
        // J(T) is non-random, so E J² = (E J)² exactly.
        let y = y_unchecked(params, t);
        return Ok(y * y);
    }
    let r = params.r();
    let s2 = params.sigma() * params.sigma();
    let beta = 2.0 * s2 - r;
    if (beta * t).abs() < Z_SERIES_SWITCH {
        return z_integral(params, t);
    }
    let g_alpha = growth_integral(s2 - r, t);
    let g_sum = growth_integral(3.0 * s2 - 2.0 * r, t);
    Ok(2.0 * (g_sum - g_alpha) / beta)
}

fn z_integral(params: &MarketParams, t: f64) -> Result<f64> {
    let r = params.r();
    let s2 = params.sigma() * params.sigma();
    let alpha = s2 - r;
    let beta = 2.0 * s2 - r;
    let integral = adaptive_simpson(
        |s| (alpha * s).exp() * growth_integral(beta, s),
        0.0,
        t,
        Z_QUADRATURE_RTOL,
        0.0,
    )?;
    Ok(2.0 * integral.value)
}
