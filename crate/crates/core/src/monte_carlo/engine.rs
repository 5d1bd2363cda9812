//! Path simulation of `J(T)` with exact log-normal increments.
//!
//! `log B(t,0)` is advanced by exact Gaussian increments, so `B` itself
//! carries no discretization bias; `J` is the trapezoid integral of
//! `B(s,0)⁻¹` over the time grid. Paths are generated in fixed-size blocks,
//! each on its own ChaCha stream, and block statistics are merged in block
//! order, so results do not depend on how rayon schedules the blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::core_model::Horizon;
use crate::error::{PricingError, Result};

use super::sampling::HorizonSampler;
use super::stats::PairMoments;
use super::{McEstimate, Schedule, SimConfig};

/// Paths per block; even so antithetic pairs never straddle blocks.
pub(crate) const BLOCK_PATHS: usize = 4096;

/// Time grid of one path: coarse intervals, each optionally split in two.
struct Plan {
    coarse_dt: Vec<f64>,
    /// `(mean, sd)` of the `log B` increment per simulated step.
    steps: Vec<(f64, f64)>,
    refined: bool,
}

impl Plan {
    fn build(schedule: &Schedule, horizon: f64, steps_per_year: usize, refined: bool) -> Plan {
        let mut nodes = vec![0.0];
        if horizon > 0.0 {
            let h = 1.0 / steps_per_year as f64;
            let mut k = 1usize;
            while (k as f64) * h < horizon * (1.0 - 1e-12) {
                nodes.push(k as f64 * h);
                k += 1;
            }
            nodes.extend(
                schedule
                    .breakpoints()
                    .iter()
                    .copied()
                    .filter(|&b| b > 0.0 && b < horizon),
            );
            nodes.push(horizon);
            nodes.sort_by(f64::total_cmp);
            nodes.dedup_by(|b, a| *b - *a <= 1e-12 * horizon.max(1.0));
            // dedup keeps the earlier node; make sure the horizon itself ends the grid.
            *nodes.last_mut().expect("grid has nodes") = horizon;
        }

        let mut coarse_dt = Vec::with_capacity(nodes.len());
        let mut steps = Vec::with_capacity(if refined { 2 } else { 1 } * nodes.len());
        for w in nodes.windows(2) {
            coarse_dt.push(w[1] - w[0]);
            if refined {
                let mid = 0.5 * (w[0] + w[1]);
                steps.push(schedule.log_increment(w[0], mid));
                steps.push(schedule.log_increment(mid, w[1]));
            } else {
                steps.push(schedule.log_increment(w[0], w[1]));
            }
        }
        Plan {
            coarse_dt,
            steps,
            refined,
        }
    }

    /// Returns `(J on the simulated grid, J on the coarse grid)`, or the index
    /// of the first step whose discount factor is not finite.
    fn integrate(&self, normals: &[f64], sign: f64) -> std::result::Result<(f64, f64), usize> {
        let mut log_b = 0.0;
        let mut d_prev = 1.0;
        let mut j_fine = 0.0;
        let mut j_coarse = 0.0;
        if self.refined {
            for (k, &dt) in self.coarse_dt.iter().enumerate() {
                let (m1, s1) = self.steps[2 * k];
                let (m2, s2) = self.steps[2 * k + 1];
                log_b += m1 + s1 * sign * normals[2 * k];
                let d_mid = (-log_b).exp();
                log_b += m2 + s2 * sign * normals[2 * k + 1];
                let d_end = (-log_b).exp();
                if !d_end.is_finite() || !d_mid.is_finite() {
                    return Err(2 * k);
                }
                j_fine += 0.25 * dt * (d_prev + 2.0 * d_mid + d_end);
                j_coarse += 0.5 * dt * (d_prev + d_end);
                d_prev = d_end;
            }
        } else {
            for (k, (&dt, &(m, s))) in self.coarse_dt.iter().zip(&self.steps).enumerate() {
                log_b += m + s * sign * normals[k];
                let d = (-log_b).exp();
                if !d.is_finite() {
                    return Err(k);
                }
                j_fine += 0.5 * dt * (d_prev + d);
                d_prev = d;
            }
            j_coarse = j_fine;
        }
        Ok((j_fine, j_coarse))
    }
}

enum PathSource {
    Fixed(Plan),
    Random {
        sampler: HorizonSampler,
        schedule: Schedule,
        steps_per_year: usize,
        refined: bool,
    },
}

#[derive(Default)]
struct BlockOutput {
    units: PairMoments,
    paths: PairMoments,
    samples: Vec<f64>,
}

/// Runs every path and maps `(J_fine, J_coarse)` to an `(x, y)` observation.
fn run<M>(
    schedule: &Schedule,
    horizon: &Horizon,
    cfg: &SimConfig,
    refined: bool,
    keep_samples: bool,
    observe: M,
) -> Result<BlockOutput>
where
    M: Fn(f64, f64) -> (f64, f64) + Sync,
{
    cfg.validate()?;
    let source = match horizon {
        Horizon::Fixed(t) => {
            if !(t.is_finite() && *t > 0.0) {
                return Err(PricingError::invalid(format!(
                    "fixed horizon must be positive, got {t}"
                )));
            }
            PathSource::Fixed(Plan::build(schedule, *t, cfg.n_steps, refined))
        }
        other => PathSource::Random {
            sampler: HorizonSampler::new(other)?,
            schedule: schedule.clone(),
            steps_per_year: cfg.n_steps,
            refined,
        },
    };

    let n_blocks = cfg.n_paths.div_ceil(BLOCK_PATHS);
    let blocks: Vec<BlockOutput> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let first = block * BLOCK_PATHS;
            let count = BLOCK_PATHS.min(cfg.n_paths - first);
            run_block(&source, cfg, block, first, count, keep_samples, &observe)
        })
        .collect::<Result<_>>()?;

    let mut total = BlockOutput::default();
    for b in blocks {
        total.units.merge(&b.units);
        total.paths.merge(&b.paths);
        total.samples.extend(b.samples);
    }
    Ok(total)
}

fn run_block<M>(
    source: &PathSource,
    cfg: &SimConfig,
    block: usize,
    first: usize,
    count: usize,
    keep_samples: bool,
    observe: &M,
) -> Result<BlockOutput>
where
    M: Fn(f64, f64) -> (f64, f64),
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(block as u64);
    let mut out = BlockOutput {
        samples: Vec::with_capacity(if keep_samples { count } else { 0 }),
        ..Default::default()
    };
    let mut normals = Vec::new();
    let per_unit = if cfg.antithetic { 2 } else { 1 };
    let mut random_plan;

    for unit in 0..count / per_unit {
        let plan = match source {
            PathSource::Fixed(plan) => plan,
            PathSource::Random {
                sampler,
                schedule,
                steps_per_year,
                refined,
            } => {
                let t = sampler.sample(&mut rng);
                random_plan = Plan::build(schedule, t, *steps_per_year, *refined);
                &random_plan
            }
        };
        normals.clear();
        normals.extend((0..plan.steps.len()).map(|_| rng.sample::<f64, _>(StandardNormal)));

        let mut sum = (0.0, 0.0);
        for leg in 0..per_unit {
            let sign = if leg == 0 { 1.0 } else { -1.0 };
            let path = first + unit * per_unit + leg;
            let (jf, jc) = plan
                .integrate(&normals, sign)
                .map_err(|step| PricingError::Simulation { path, step })?;
            let (x, y) = observe(jf, jc);
            if !(x.is_finite() && y.is_finite()) {
                return Err(PricingError::Simulation {
                    path,
                    step: plan.steps.len(),
                });
            }
            out.paths.push(x, y);
            if keep_samples {
                out.samples.push(x);
            }
            sum.0 += x;
            sum.1 += y;
        }
        out.units
            .push(sum.0 / per_unit as f64, sum.1 / per_unit as f64);
    }
    Ok(out)
}

/// Sample moments of `J(T)` with the trapezoid rule at `cfg.n_steps` per year.
pub fn simulate_j(schedule: &Schedule, horizon: &Horizon, cfg: &SimConfig) -> Result<McEstimate> {
    let out = run(schedule, horizon, cfg, false, false, |j, _| (j, j * j))?;
    Ok(McEstimate::from_moments(&out.units, &out.paths, cfg, false))
}

/// Moments of `J(T)` Richardson-extrapolated from `n_steps` and `2·n_steps`
/// per year, both computed on the same Brownian path.
///
/// The trapezoid bias in `E J` and `E J²` is `O(h²)`, so
/// `(4·E_{h/2} - E_h) / 3` removes its leading term; the per-path values
/// `(4 J_{h/2} - J_h)/3` and `(4 J_{h/2}² - J_h²)/3` have exactly those
/// expectations, which gives standard errors directly.
pub fn simulate_j_extrapolated(
    schedule: &Schedule,
    horizon: &Horizon,
    cfg: &SimConfig,
) -> Result<McEstimate> {
    let out = run(schedule, horizon, cfg, true, false, richardson)?;
    Ok(McEstimate::from_moments(&out.units, &out.paths, cfg, true))
}

pub(crate) fn richardson(j_fine: f64, j_coarse: f64) -> (f64, f64) {
    (
        (4.0 * j_fine - j_coarse) / 3.0,
        (4.0 * j_fine * j_fine - j_coarse * j_coarse) / 3.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantilePoint {
    pub p: f64,
    pub value: f64,
}

/// Distribution of the hedging error `a - u·J(T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgingErrorStats {
    pub mean: f64,
    pub second_moment: f64,
    pub std_error_second_moment: f64,
    pub quantiles: Vec<QuantilePoint>,
    pub n_paths: usize,
}

pub const HEDGING_QUANTILES: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

pub fn hedging_error_distribution(
    a: f64,
    u: f64,
    schedule: &Schedule,
    horizon: &Horizon,
    cfg: &SimConfig,
) -> Result<HedgingErrorStats> {
    if !(a.is_finite() && a > 0.0 && u.is_finite() && u > 0.0) {
        return Err(PricingError::invalid(format!(
            "price and payment rate must be positive, got a={a}, u={u}"
        )));
    }
    let out = run(schedule, horizon, cfg, false, true, |j, _| {
        let e = a - u * j;
        (e, e * e)
    })?;
    let mut samples = out.samples;
    samples.sort_by(f64::total_cmp);
    let quantiles = HEDGING_QUANTILES
        .iter()
        .map(|&p| QuantilePoint {
            p,
            value: quantile_sorted(&samples, p),
        })
        .collect();
    Ok(HedgingErrorStats {
        mean: out.units.mean_x,
        second_moment: out.units.mean_y,
        std_error_second_moment: (out.units.var_y() / out.units.n as f64).sqrt(),
        quantiles,
        n_paths: cfg.n_paths,
    })
}

/// Linear interpolation between order statistics.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
