//! Shared-path simulation for a grid of rates and horizons at one volatility.
//!
//! With constant coefficients `B(t,0)⁻¹ = exp(-σ w(t) + σ²t/2) · e^{-rt}`, so
//! one Brownian path serves every rate, and the running integral at each
//! horizon on the way to the longest one serves every horizon. Each
//! `(r, T)` estimate is still an ordinary Richardson-extrapolated estimate
//! over `n_paths` paths; estimates for different points are correlated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::core_model::MarketParams;
use crate::error::{PricingError, Result};

use super::engine::{richardson, BLOCK_PATHS};
use super::stats::PairMoments;
use super::{McEstimate, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub r: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub estimate: McEstimate,
}

struct Layout {
    sigma: f64,
    /// Fine step, half the coarse step.
    h: f64,
    /// Coarse-step index of each horizon.
    stops: Vec<usize>,
    /// `e^{-r t}` at every fine node, one row per rate.
    discount: Vec<Vec<f64>>,
}

/// Richardson-extrapolated moments of `J(T)` for every `(r, T)` pair.
///
/// Horizons must be whole multiples of the coarse step `1 / n_steps`.
/// Points come back rate-major: all horizons for `rates[0]` first.
pub fn simulate_constant_sigma_family(
    sigma: f64,
    rates: &[f64],
    horizons: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<FamilyPoint>> {
    cfg.validate()?;
    for &r in rates {
        MarketParams::new(r, sigma)?;
    }
    if rates.is_empty() || horizons.is_empty() {
        return Err(PricingError::invalid(
            "need at least one rate and one horizon",
        ));
    }
    let n = cfg.n_steps as f64;
    let mut stops = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let k = (t * n).round();
        if t.is_nan() || t <= 0.0 || (t * n - k).abs() > 1e-9 || k < 1.0 {
            return Err(PricingError::invalid(format!(
                "horizon {t} is not a positive multiple of the step 1/{}",
                cfg.n_steps
            )));
        }
        stops.push(k as usize);
    }
    let max_coarse = *stops.iter().max().expect("nonempty");
    let h = 0.5 / n;
    let discount = rates
        .iter()
        .map(|&r| {
            (0..=2 * max_coarse)
                .map(|i| (-r * h * i as f64).exp())
                .collect()
        })
        .collect();
    let layout = Layout {
        sigma,
        h,
        stops,
        discount,
    };

    let points = rates.len() * horizons.len();
    let n_blocks = cfg.n_paths.div_ceil(BLOCK_PATHS);
    let blocks: Vec<Vec<(PairMoments, PairMoments)>> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let first = block * BLOCK_PATHS;
            let count = BLOCK_PATHS.min(cfg.n_paths - first);
            run_block(&layout, cfg, block, first, count, points)
        })
        .collect::<Result<_>>()?;

    let mut totals = vec![(PairMoments::default(), PairMoments::default()); points];
    for block in &blocks {
        for (total, part) in totals.iter_mut().zip(block) {
            total.0.merge(&part.0);
            total.1.merge(&part.1);
        }
    }

    let mut out = Vec::with_capacity(points);
    for (ri, &r) in rates.iter().enumerate() {
        for (hi, &t) in horizons.iter().enumerate() {
            let (units, paths) = &totals[ri * horizons.len() + hi];
            out.push(FamilyPoint {
                r,
                sigma,
                horizon: t,
                estimate: McEstimate::from_moments(units, paths, cfg, true),
            });
        }
    }
    Ok(out)
}

fn run_block(
    layout: &Layout,
    cfg: &SimConfig,
    block: usize,
    first: usize,
    count: usize,
    points: usize,
) -> Result<Vec<(PairMoments, PairMoments)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(block as u64);
    let fine_steps = 2 * layout.stops.iter().max().copied().unwrap_or(0);
    let mut normals = vec![0.0; fine_steps];
    let mut stats = vec![(PairMoments::default(), PairMoments::default()); points];
    let per_unit = if cfg.antithetic { 2 } else { 1 };
    let mut leg_values = vec![(0.0, 0.0); points];
    let mut unit_sum = vec![(0.0, 0.0); points];

    for unit in 0..count / per_unit {
        for z in normals.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        unit_sum.iter_mut().for_each(|s| *s = (0.0, 0.0));
        for leg in 0..per_unit {
            let sign = if leg == 0 { 1.0 } else { -1.0 };
            let path = first + unit * per_unit + leg;
            integrate(layout, &normals, sign, &mut leg_values)
                .map_err(|step| PricingError::Simulation { path, step })?;
            for (i, &(jf, jc)) in leg_values.iter().enumerate() {
                let (x, y) = richardson(jf, jc);
                stats[i].1.push(x, y);
                unit_sum[i].0 += x;
                unit_sum[i].1 += y;
            }
        }
        for (s, &(x, y)) in stats.iter_mut().zip(&unit_sum) {
            s.0.push(x / per_unit as f64, y / per_unit as f64);
        }
    }
    Ok(stats)
}

/// Fills `out[rate * n_horizons + horizon]` with `(J_fine, J_coarse)`.
fn integrate(
    layout: &Layout,
    normals: &[f64],
    sign: f64,
    out: &mut [(f64, f64)],
) -> std::result::Result<(), usize> {
    let n_rates = layout.discount.len();
    let n_h = layout.stops.len();
    let sd = layout.sigma * layout.h.sqrt();
    let drift = 0.5 * layout.sigma * layout.sigma * layout.h;
    let coarse = 2.0 * layout.h;

    let mut jf = vec![0.0; n_rates];
    let mut jc = vec![0.0; n_rates];
    let mut prev = vec![1.0; n_rates];
    let mut log_base = 0.0;
    let last = layout.stops.iter().max().copied().unwrap_or(0);

    for k in 0..last {
        log_base += drift - sd * sign * normals[2 * k];
        let base_mid = log_base.exp();
        log_base += drift - sd * sign * normals[2 * k + 1];
        let base_end = log_base.exp();
        if !base_end.is_finite() {
            return Err(2 * k + 1);
        }
        for ri in 0..n_rates {
            let disc = &layout.discount[ri];
            let d_mid = base_mid * disc[2 * k + 1];
            let d_end = base_end * disc[2 * k + 2];
            jf[ri] += 0.5 * layout.h * (prev[ri] + 2.0 * d_mid + d_end);
            jc[ri] += 0.5 * coarse * (prev[ri] + d_end);
            prev[ri] = d_end;
        }
        for (hi, &stop) in layout.stops.iter().enumerate() {
            if stop == k + 1 {
                for ri in 0..n_rates {
                    out[ri * n_h + hi] = (jf[ri], jc[ri]);
                }
            }
        }
    }
    Ok(())
}
