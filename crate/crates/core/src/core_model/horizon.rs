use std::sync::Arc;

use serde::Serialize;

use crate::error::{PricingError, Result};
use crate::mortality::{density_from_table, LifeTable};

/// Largest deviation of `∫λ` from 1 that is silently renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Terminal time of the annuity.
#[derive(Debug, Clone)]
pub enum Horizon {
    /// Fixed-term annuity ending at `T` years.
    Fixed(f64),
    /// Random lifetime with a tabulated density.
    Density(TabulatedDensity),
    /// Remaining lifetime of an annuitant aged `current_age`, read off a life table.
    LifeTable {
        table: Arc<LifeTable>,
        current_age: u32,
    },
}

impl Horizon {
    pub fn fixed(t: f64) -> Result<Self> {
        if !t.is_finite() || t <= 0.0 {
            return Err(PricingError::invalid(format!(
                "fixed horizon must be finite and positive, got {t}"
            )));
        }
        Ok(Horizon::Fixed(t))
    }

    /// The horizon's density, or `None` for a fixed horizon.
    pub fn density(&self) -> Result<Option<TabulatedDensity>> {
        match self {
            Horizon::Fixed(_) => Ok(None),
            Horizon::Density(d) => Ok(Some(d.clone())),
            Horizon::LifeTable { table, current_age } => Ok(Some(
                density_from_table(table, *current_age)?.to_tabulated()?,
            )),
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(self, Horizon::Fixed(_))
    }
}

/// Piecewise-linear probability density on a bounded support.
///
/// Knots are nondecreasing in `t`. Two consecutive knots may share the same
/// time, which encodes a jump; step densities built with
/// [`TabulatedDensity::from_bins`] use this.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedDensity {
    times: Vec<f64>,
    values: Vec<f64>,
    /// CDF at each knot.
    cumulative: Vec<f64>,
}

impl TabulatedDensity {
    /// Builds a density from `(t, λ(t))` samples interpolated linearly.
    pub fn from_samples(points: &[(f64, f64)]) -> Result<Self> {
        let (times, values) = points.iter().copied().unzip();
        Self::new(times, values)
    }

    /// Builds a step density: `values[i]` on `[edges[i], edges[i + 1])`.
    pub fn from_bins(edges: &[f64], values: &[f64]) -> Result<Self> {
        if edges.len() != values.len() + 1 {
            return Err(PricingError::invalid(format!(
                "{} bin edges given for {} bin values",
                edges.len(),
                values.len()
            )));
        }
        let mut times = Vec::with_capacity(2 * values.len());
        let mut vals = Vec::with_capacity(2 * values.len());
        for (i, &v) in values.iter().enumerate() {
            times.push(edges[i]);
            vals.push(v);
            times.push(edges[i + 1]);
            vals.push(v);
        }
        Self::new(times, vals)
    }

    fn new(times: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(PricingError::invalid(format!(
                "density grid needs at least 2 points, got {}",
                times.len()
            )));
        }
        for (i, (&t, &v)) in times.iter().zip(&values).enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(PricingError::invalid(format!(
                    "density knot {i}: time must be finite and nonnegative, got {t}"
                )));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(PricingError::invalid(format!(
                    "density knot {i}: value must be finite and nonnegative, got {v}"
                )));
            }
        }
        for (i, w) in times.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(PricingError::invalid(format!(
                    "density knots must be nondecreasing (knot {} at {} after {})",
                    i + 1,
                    w[1],
                    w[0]
                )));
            }
        }
        for (i, w) in times.windows(3).enumerate() {
            if w[0] == w[1] && w[1] == w[2] {
                return Err(PricingError::invalid(format!(
                    "more than two density knots at t = {} (knot {i})",
                    w[0]
                )));
            }
        }

        let mass = trapezoid_mass(&times, &values);
        if mass.is_nan() || (1.0 - mass).abs() > NORMALIZATION_TOLERANCE {
            return Err(PricingError::invalid(format!(
                "density integrates to {mass}, not 1 within {NORMALIZATION_TOLERANCE}"
            )));
        }
        for v in &mut values {
            *v /= mass;
        }
        let mut cumulative = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..times.len() {
            acc += 0.5 * (values[i - 1] + values[i]) * (times[i] - times[i - 1]);
            cumulative.push(acc);
        }
        // Pin the last knot so inverse sampling never runs off the end.
        let total = acc;
        for c in &mut cumulative {
            *c /= total;
        }
        Ok(Self {
            times,
            values,
            cumulative,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Linear pieces `(t0, t1, λ(t0), λ(t1))` with positive length.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (1..self.times.len()).filter_map(move |i| {
            let (t0, t1) = (self.times[i - 1], self.times[i]);
            (t1 > t0).then(|| (t0, t1, self.values[i - 1], self.values[i]))
        })
    }

    /// Density at `t`; right-continuous at jumps, zero outside the support.
    pub fn pdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return 0.0;
        }
        for (t0, t1, v0, v1) in self.segments() {
            if t >= t0 && t < t1 {
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
        }
        self.values[self.values.len() - 1]
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        // Last knot with time <= t.
        let i = self.times.partition_point(|&x| x <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let x = t - t0;
        let slope = (v1 - v0) / (t1 - t0);
        let total = self.total_mass();
        self.cumulative[i] + (v0 * x + 0.5 * slope * x * x) / total
    }

    /// Inverse CDF; `p` is clamped to `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let n = self.times.len();
        // First knot whose cumulative reaches p, skipping zero-length pieces.
        let i = self.cumulative.partition_point(|&c| c < p).clamp(1, n - 1);
        let mut i = i;
        while i < n - 1 && self.times[i] == self.times[i - 1] {
            i += 1;
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        if t1 == t0 {
            return t0;
        }
        let mass = (p - self.cumulative[i - 1]).max(0.0) * self.total_mass();
        let slope = (v1 - v0) / (t1 - t0);
        // Root of v0·x + slope·x²/2 = mass in the cancellation-free form.
        let disc = (v0 * v0 + 2.0 * slope * mass).max(0.0);
        let denom = v0 + disc.sqrt();
        let x = if denom > 0.0 { 2.0 * mass / denom } else { 0.0 };
        (t0 + x).min(t1)
    }

    pub fn mean(&self) -> f64 {
        self.segments()
            .map(|(a, b, v0, v1)| (b - a) * (v0 * (2.0 * a + b) + v1 * (a + 2.0 * b)) / 6.0)
            .sum::<f64>()
            / self.total_mass()
    }

    fn total_mass(&self) -> f64 {
        trapezoid_mass(&self.times, &self.values)
    }
}

fn trapezoid_mass(times: &[f64], values: &[f64]) -> f64 {
    (1..times.len())
        .map(|i| 0.5 * (values[i - 1] + values[i]) * (times[i] - times[i - 1]))
        .sum()
}
