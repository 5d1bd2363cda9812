//! Recovers the volatility that reproduces a quote.
//!
//! `â(u)` increases with σ and `û(a)` decreases with σ, so the residual
//! between the re-priced and quoted output is monotone on `[0, σ_max]` and a
//! bracketing solver finds the unique root.

use crate::error::{PricingError, Result};

use super::closed_form::{y_closed_form, z_closed_form};
use super::{MarketParams, Problem, Quote};

pub const DEFAULT_SIGMA_MAX: f64 = 2.0;

/// Quotes within this relative distance of the σ = 0 price are deterministic.
const ZERO_SIGMA_RTOL: f64 = 1e-14;
const MONOTONE_PROBES: usize = 32;
const MAX_ITER: usize = 200;

pub fn implied_sigma(quote: &Quote, r: f64, t: f64) -> Result<f64> {
    implied_sigma_with_bound(quote, r, t, DEFAULT_SIGMA_MAX)
}

pub fn implied_sigma_with_bound(quote: &Quote, r: f64, t: f64, sigma_max: f64) -> Result<f64> {
    if !(quote.a.is_finite() && quote.a > 0.0 && quote.u.is_finite() && quote.u > 0.0) {
        return Err(PricingError::invalid(format!(
            "quote amounts must be positive, got a={}, u={}",
            quote.a, quote.u
        )));
    }
    if !(sigma_max.is_finite() && sigma_max > 0.0) {
        return Err(PricingError::invalid(format!(
            "sigma_max must be positive, got {sigma_max}"
        )));
    }
    let base = MarketParams::new(r, 0.0)?;
    // Relative residual: positive when the model output exceeds the quote.
    let residual = |sigma: f64| -> Result<f64> {
        let params = base.with_sigma(sigma)?;
        let y = y_closed_form(&params, t)?;
        Ok(match quote.problem {
            Problem::PriceGivenPayment => (quote.u * y - quote.a) / quote.a,
            Problem::PaymentGivenPrice => {
                let z = z_closed_form(&params, t)?;
                (quote.a * (y / z) - quote.u) / quote.u
            }
        })
    };

    let r0 = residual(0.0)?;
    if r0.abs() <= ZERO_SIGMA_RTOL {
        return Ok(0.0);
    }

    // Shrink the bracket until the closed forms are representable.
    let mut hi = sigma_max;
    let mut r_hi = residual(hi);
    let mut shrinks = 0;
    while let Err(PricingError::Domain { .. }) = r_hi {
        shrinks += 1;
        if shrinks > 400 {
            break;
        }
        hi *= 0.95;
        r_hi = residual(hi);
    }
    let r_hi = r_hi?;

    let increasing = quote.problem == Problem::PriceGivenPayment;
    let mut probes = Vec::with_capacity(MONOTONE_PROBES + 1);
    probes.push((0.0, r0));
    for i in 1..MONOTONE_PROBES {
        let s = hi * i as f64 / MONOTONE_PROBES as f64;
        probes.push((s, residual(s)?));
    }
    probes.push((hi, r_hi));
    for w in probes.windows(2) {
        let step = w[1].1 - w[0].1;
        if (increasing && step < 0.0) || (!increasing && step > 0.0) {
            return Err(PricingError::NonMonotone { sigma: w[1].0 });
        }
    }

    if r0.signum() == r_hi.signum() {
        return Err(PricingError::InversionInfeasible {
            low: 0.0,
            high: hi,
            residual_low: r0,
            residual_high: r_hi,
        });
    }
    let bracket = probes
        .windows(2)
        .find(|w| w[0].1.signum() != w[1].1.signum() || w[1].1 == 0.0)
        .map(|w| (w[0], w[1]))
        .expect("sign change between the bracket ends");
    brent(residual, bracket.0, bracket.1)
}

/// Brent's method on a sign-changing bracket, to full `f64` resolution in σ.
fn brent<F>(f: F, (mut a, mut fa): (f64, f64), (mut b, mut fb): (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if fb == 0.0 {
        return Ok(b);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_model::{moments, payment_given_price, price_given_payment, Horizon};
    use approx::assert_abs_diff_eq;

    fn quote_at(problem: Problem, amount: f64, r: f64, sigma: f64, t: f64) -> Quote {
        let params = MarketParams::new(r, sigma).unwrap();
        let m = moments(&params, &Horizon::Fixed(t)).unwrap();
        Quote::solve(problem, amount, &m).unwrap()
    }

    #[test]
    fn price_round_trip() {
        let q = quote_at(Problem::PriceGivenPayment, 1.0, 0.05, 0.2, 20.0);
        assert_abs_diff_eq!(implied_sigma(&q, 0.05, 20.0).unwrap(), 0.2, epsilon = 1e-6);
    }

    #[test]
    fn payment_round_trip() {
        let q = quote_at(Problem::PaymentGivenPrice, 1.0, 0.03, 0.1, 30.0);
        assert_abs_diff_eq!(implied_sigma(&q, 0.03, 30.0).unwrap(), 0.1, epsilon = 1e-6);
    }

    #[test]
    fn deterministic_price_gives_zero() {
        let r: f64 = 0.05;
        let a = (1.0 - (-r * 20.0).exp()) / r;
        let q = Quote {
            problem: Problem::PriceGivenPayment,
            a,
            u: 1.0,
            risk_second_moment: 0.0,
        };
        assert_eq!(implied_sigma(&q, r, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn price_below_deterministic_value_is_infeasible() {
        let params = MarketParams::new(0.05, 0.0).unwrap();
        let m = moments(&params, &Horizon::Fixed(20.0)).unwrap();
        let mut q = price_given_payment(1.0, &m).unwrap();
        q.a *= 0.9;
        let err = implied_sigma(&q, 0.05, 20.0).unwrap_err();
        assert!(
            matches!(err, PricingError::InversionInfeasible { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn payment_above_deterministic_rate_is_infeasible() {
        let params = MarketParams::new(0.05, 0.0).unwrap();
        let m = moments(&params, &Horizon::Fixed(20.0)).unwrap();
        let mut q = payment_given_price(1.0, &m).unwrap();
        q.u *= 1.1;
        assert!(matches!(
            implied_sigma(&q, 0.05, 20.0),
            Err(PricingError::InversionInfeasible { .. })
        ));
    }

    #[test]
    fn long_horizon_shrinks_bracket_instead_of_overflowing() {
        // 3σ²T exceeds the f64 exponent range at σ = 2, T = 80.
        let q = quote_at(Problem::PaymentGivenPrice, 1.0, 0.02, 0.3, 80.0);
        assert_abs_diff_eq!(implied_sigma(&q, 0.02, 80.0).unwrap(), 0.3, epsilon = 1e-6);
    }
}
