//! Closed-form moments of the discounted payment factor `J(T)` and the two
//! risk-minimizing quotes built on them.

mod closed_form;
mod horizon;
mod implied;
mod moments;
mod params;
mod quote;

pub use closed_form::{growth_integral, y_closed_form, z_by_quadrature, z_closed_form};
pub use horizon::{Horizon, TabulatedDensity};
pub use implied::{implied_sigma, implied_sigma_with_bound, DEFAULT_SIGMA_MAX};
pub use moments::{moments, DiscountMoments};
pub use params::MarketParams;
pub use quote::{payment_given_price, price_given_payment, spread, Problem, Quote, SpreadReport};
