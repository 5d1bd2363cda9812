//! Risk-minimizing pricing of fixed-term and life annuities under stochastic
//! investment returns.
//!
//! The seller invests a lump sum `a` in an asset whose gross return follows a
//! geometric Brownian motion, and pays the annuitant a continuous cash flow at
//! rate `u` until the horizon `T`. The discounted cost of the payments per unit
//! rate is `J(T) = ∫₀ᵀ B(s,0)⁻¹ ds`; both sides minimize the mean-square
//! hedging error `E|a - u J(T)|²`. Fixing `u` and solving for `a` gives a
//! different answer from fixing `a` and solving for `u` whenever `J(T)` is
//! random, and the gap between the two is what [`core_model::spread`]
//! reports.
//!
//! Modules:
//! - [`core_model`]: closed-form moments of `J(T)`, quotes, spread, implied σ.
//! - [`monte_carlo`]: exact-increment simulation used as an independent check.
//! - [`mortality`]: life tables and remaining-lifetime densities.

pub mod core_model;
mod error;
pub mod monte_carlo;
pub mod mortality;
pub mod quadrature;

pub use core_model::{
    implied_sigma, implied_sigma_with_bound, moments, payment_given_price, price_given_payment,
    spread, y_closed_form, z_by_quadrature, z_closed_form, DiscountMoments, Horizon, MarketParams,
    Problem, Quote, SpreadReport, TabulatedDensity,
};
pub use error::{PricingError, Result};
pub use mortality::{density_from_table, life_annuity_quote, LifeTable, RemainingLifetimeDensity};
