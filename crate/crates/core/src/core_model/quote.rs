use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{PricingError, Result};

use super::DiscountMoments;

/// Which side of the contract is held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// Payment rate `u` given; choose the price `a`.
    PriceGivenPayment,
    /// Price `a` given; choose the payment rate `u`.
    PaymentGivenPrice,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::PriceGivenPayment => "price",
            Problem::PaymentGivenPrice => "payment",
        })
    }
}

impl FromStr for Problem {
    type Err = PricingError;

    /// Accepts the quantity being solved for: `price` or `payment`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "price" => Ok(Problem::PriceGivenPayment),
            "payment" => Ok(Problem::PaymentGivenPrice),
            other => Err(PricingError::invalid(format!(
                "direction must be `price` or `payment`, got `{other}`"
            ))),
        }
    }
}

/// A price/payment pair at the optimum of one of the two problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quote {
    pub problem: Problem,
    /// Lump sum paid for the annuity.
    pub a: f64,
    /// Continuous payment rate per year.
    pub u: f64,
    /// `E|a - u J(T)|²` at the optimum.
    pub risk_second_moment: f64,
}

impl Quote {
    /// The amount the caller supplied.
    pub fn input(&self) -> f64 {
        match self.problem {
            Problem::PriceGivenPayment => self.u,
            Problem::PaymentGivenPrice => self.a,
        }
    }

    /// The amount the optimization produced.
    pub fn output(&self) -> f64 {
        match self.problem {
            Problem::PriceGivenPayment => self.a,
            Problem::PaymentGivenPrice => self.u,
        }
    }

    /// Solves the given problem for `amount`.
    pub fn solve(problem: Problem, amount: f64, m: &DiscountMoments) -> Result<Self> {
        match problem {
            Problem::PriceGivenPayment => price_given_payment(amount, m),
            Problem::PaymentGivenPrice => payment_given_price(amount, m),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(PricingError::invalid(format!(
            "{name} must be finite and positive, got {x}"
        )))
    }
}

/// Risk-minimizing price for payment rate `u`: `a = u·m1`, residual `u²·Var J`.
pub fn price_given_payment(u: f64, m: &DiscountMoments) -> Result<Quote> {
    positive("payment rate u", u)?;
    Ok(Quote {
        problem: Problem::PriceGivenPayment,
        a: u * m.m1(),
        u,
        risk_second_moment: u * u * m.variance(),
    })
}

/// Risk-minimizing payment rate for price `a`: `u = a·m1/m2`, residual
/// `a²·(1 - m1²/m2)`.
pub fn payment_given_price(a: f64, m: &DiscountMoments) -> Result<Quote> {
    positive("price a", a)?;
    Ok(Quote {
        problem: Problem::PaymentGivenPrice,
        a,
        u: a * m.m1() / m.m2(),
        risk_second_moment: a * a * (m.variance() / m.m2()),
    })
}

/// Relative payment rates implied by the two problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadReport {
    /// `û(a)/a`, the rate per unit price when the price is fixed.
    pub u_hat_over_a: f64,
    /// `u/â(u)`, the rate per unit price when the payment is fixed.
    pub u_over_a_hat: f64,
    /// `u/â(u) - û(a)/a`; zero only when `J(T)` is deterministic.
    pub difference: f64,
    /// `(û(a)/a) / (u/â(u)) = m1²/m2`.
    pub ratio: f64,
}

/// Both relative rates are homogeneous of degree zero, so the report depends
/// on `a` and `u` only through validation.
pub fn spread(a: f64, u: f64, m: &DiscountMoments) -> Result<SpreadReport> {
    positive("price a", a)?;
    positive("payment rate u", u)?;
    Ok(SpreadReport {
        u_hat_over_a: m.m1() / m.m2(),
        u_over_a_hat: 1.0 / m.m1(),
        difference: m.variance() / (m.m1() * m.m2()),
        ratio: m.spread_ratio(),
    })
}
