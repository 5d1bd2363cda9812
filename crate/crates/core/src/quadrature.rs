//! Adaptive Simpson quadrature with Richardson correction.
//!
//! Each panel compares the one-panel Simpson estimate `S1` against the
//! two-half-panel estimate `S2`; since the error of Simpson's rule scales as
//! `h⁴`, `(S2 - S1) / 15` estimates the error of `S2` and adding it back gives
//! a sixth-order (Boole) value.

use crate::error::{PricingError, Result};

const MAX_DEPTH: u32 = 48;
const INITIAL_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the per-panel Richardson error estimates.
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

fn simpson(h: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `abs_tol` is a floor used when the integral itself is near zero.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(PricingError::invalid("integration bounds must be finite"));
    }
    if b <= a {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }

    let width = b - a;
    let h0 = width / INITIAL_PANELS as f64;
    let mut evaluations = 0usize;
    let mut eval = |x: f64| {
        evaluations += 1;
        f(x)
    };

    // Coarse pass: gives both the initial panels and a scale for the tolerance.
    let mut nodes = Vec::with_capacity(2 * INITIAL_PANELS + 1);
    for i in 0..=2 * INITIAL_PANELS {
        let x = if i == 2 * INITIAL_PANELS {
            b
        } else {
            a + 0.5 * h0 * i as f64
        };
        nodes.push((x, eval(x)));
    }
    let mut stack = Vec::with_capacity(64);
    let mut scale = 0.0;
    for i in 0..INITIAL_PANELS {
        let (pa, fa) = nodes[2 * i];
        let (_, fm) = nodes[2 * i + 1];
        let (pb, fb) = nodes[2 * i + 2];
        let whole = simpson(pb - pa, fa, fm, fb);
        scale += whole.abs();
        stack.push(Panel {
            a: pa,
            b: pb,
            fa,
            fm,
            fb,
            whole,
            depth: 0,
        });
    }
    if !scale.is_finite() {
        return Err(PricingError::Quadrature {
            achieved: f64::INFINITY,
            target: rel_tol,
        });
    }

    let tol = (rel_tol * scale).max(abs_tol);
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let mut converged = true;

    // Panels are popped left to right so the summation order is fixed.
    stack.reverse();
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(lm);
        let frm = eval(rm);
        let h = p.b - p.a;
        let left = simpson(0.5 * h, p.fa, flm, p.fm);
        let right = simpson(0.5 * h, p.fm, frm, p.fb);
        let refined = left + right;
        let delta = refined - p.whole;
        let panel_tol = tol * h / width;

        if delta.abs() <= 15.0 * panel_tol || p.depth >= MAX_DEPTH {
            if delta.abs() > 15.0 * panel_tol || !delta.is_finite() {
                converged = false;
            }
            value += refined + delta / 15.0;
            error_estimate += delta.abs() / 15.0;
        } else {
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                depth: p.depth + 1,
            });
        }
    }

    if !converged || !value.is_finite() {
        let achieved = if value != 0.0 {
            error_estimate / value.abs()
        } else {
            error_estimate
        };
        return Err(PricingError::Quadrature {
            achieved,
            target: rel_tol,
        });
    }
    Ok(Integral {
        value,
        error_estimate,
        evaluations,
    })
}
