//! Life tables and the remaining-lifetime density they imply.
//!
//! Tables are `age,qx` CSV files: one row per integer age, ascending and
//! contiguous, closing with `qx = 1`. Deaths are spread uniformly within each
//! year of age, so the density of the remaining lifetime is constant on every
//! `[k, k+1)`.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::core_model::{
    moments, DiscountMoments, Horizon, MarketParams, Problem, Quote, TabulatedDensity,
};
use crate::error::{PricingError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifeTable {
    start_age: u32,
    qx: Vec<f64>,
}

impl LifeTable {
    pub fn new(start_age: u32, qx: Vec<f64>) -> Result<Self> {
        if qx.is_empty() {
            return Err(PricingError::Parse {
                row: 1,
                message: "table has no rows".into(),
            });
        }
        for (i, &q) in qx.iter().enumerate() {
            if !(0.0..=1.0).contains(&q) {
                return Err(PricingError::Parse {
                    row: i + 2,
                    message: format!("qx = {q} is outside [0, 1]"),
                });
            }
        }
        if qx[qx.len() - 1] != 1.0 {
            return Err(PricingError::Parse {
                row: qx.len() + 1,
                message: "missing terminal row: last qx must be 1".into(),
            });
        }
        Ok(Self { start_age, qx })
    }

    /// Gompertz table with force of mortality `b·c^x`, closed at `last_age`.
    pub fn gompertz(start_age: u32, last_age: u32, b: f64, c: f64) -> Result<Self> {
        if last_age < start_age || !(b > 0.0 && c > 1.0) {
            return Err(PricingError::invalid(format!(
                "invalid Gompertz parameters: ages {start_age}..={last_age}, b={b}, c={c}"
            )));
        }
        let ln_c = c.ln();
        let mut qx: Vec<f64> = (start_age..last_age)
            .map(|x| {
                let cumulative_hazard = b * c.powi(x as i32) * (c - 1.0) / ln_c;
                -(-cumulative_hazard).exp_m1()
            })
            .collect();
        qx.push(1.0);
        Self::new(start_age, qx)
    }

    pub fn start_age(&self) -> u32 {
        self.start_age
    }

    /// Age of the closing row.
    pub fn last_age(&self) -> u32 {
        self.start_age + self.qx.len() as u32 - 1
    }

    /// First age nobody in the table reaches.
    pub fn terminal_age(&self) -> u32 {
        self.last_age() + 1
    }

    pub fn qx(&self, age: u32) -> Option<f64> {
        age.checked_sub(self.start_age)
            .and_then(|i| self.qx.get(i as usize).copied())
    }

    pub fn ages(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.qx
            .iter()
            .enumerate()
            .map(move |(i, &q)| (self.start_age + i as u32, q))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| PricingError::invalid(format!("writing life table: {e}"));
        w.write_record(["age", "qx"]).map_err(io)?;
        for (age, q) in self.ages() {
            w.write_record([age.to_string(), q.to_string()])
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| PricingError::invalid(format!("writing life table: {e}")))
    }
}

/// Reads an `age,qx` table. Row numbers in errors count the header as row 1.
pub fn load_life_table<R: Read>(source: R) -> Result<LifeTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers().map_err(|e| PricingError::Parse {
        row: 1,
        message: e.to_string(),
    })?;
    if header.len() != 2 || &header[0] != "age" || &header[1] != "qx" {
        return Err(PricingError::Parse {
            row: 1,
            message: format!(
                "expected header `age,qx`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut start_age = None;
    let mut qx = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| PricingError::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(PricingError::Parse {
                row,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let age: u32 = record[0].parse().map_err(|_| PricingError::Parse {
            row,
            message: format!("age `{}` is not a nonnegative integer", &record[0]),
        })?;
        let q: f64 = record[1].parse().map_err(|_| PricingError::Parse {
            row,
            message: format!("qx `{}` is not a number", &record[1]),
        })?;
        match start_age {
            None => start_age = Some(age),
            Some(s) => {
                let expected = s + qx.len() as u32;
                if age != expected {
                    return Err(PricingError::Parse {
                        row,
                        message: format!("expected age {expected}, found {age}"),
                    });
                }
            }
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(PricingError::Parse {
                row,
                message: format!("qx = {q} is outside [0, 1]"),
            });
        }
        qx.push(q);
    }
    LifeTable::new(start_age.unwrap_or(0), qx)
}

/// Remaining lifetime of an annuitant, measured in years from today.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainingLifetimeDensity {
    /// `S(k)` for `k = 0..=n`; `S(0) = 1`, `S(n) = 0`.
    survival: Vec<f64>,
    /// Constant density on `[k, k+1)`.
    density: Vec<f64>,
}

impl RemainingLifetimeDensity {
    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// `S(t)`, linear within each year.
    pub fn survival_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let k = t.floor() as usize;
        if k >= self.density.len() {
            return 0.0;
        }
        self.survival[k] - self.density[k] * (t - k as f64)
    }

    pub fn expected_lifetime(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(k, &d)| d * (k as f64 + 0.5))
            .sum()
    }

    pub fn max_lifetime(&self) -> f64 {
        self.density.len() as f64
    }

    pub fn to_tabulated(&self) -> Result<TabulatedDensity> {
        let edges: Vec<f64> = (0..=self.density.len()).map(|k| k as f64).collect();
        TabulatedDensity::from_bins(&edges, &self.density)
    }
}

pub fn density_from_table(table: &LifeTable, current_age: u32) -> Result<RemainingLifetimeDensity> {
    if current_age < table.start_age() || current_age >= table.terminal_age() {
        return Err(PricingError::invalid(format!(
            "current age {current_age} is outside the table's ages {}..{}",
            table.start_age(),
            table.terminal_age()
        )));
    }
    let years = (table.terminal_age() - current_age) as usize;
    let mut survival = Vec::with_capacity(years + 1);
    let mut density = Vec::with_capacity(years);
    let mut s = 1.0;
    survival.push(s);
    for k in 0..years {
        let q = table.qx(current_age + k as u32).expect("age within table");
        density.push(s * q);
        s *= 1.0 - q;
        survival.push(s);
    }
    Ok(RemainingLifetimeDensity { survival, density })
}

/// Quote for a life annuity on an annuitant aged `current_age`.
pub fn life_annuity_quote(
    table: &Arc<LifeTable>,
    current_age: u32,
    params: &MarketParams,
    problem: Problem,
    amount: f64,
) -> Result<Quote> {
    let m = life_moments(table, current_age, params)?;
    Quote::solve(problem, amount, &m)
}

pub fn life_moments(
    table: &Arc<LifeTable>,
    current_age: u32,
    params: &MarketParams,
) -> Result<DiscountMoments> {
    let horizon = Horizon::LifeTable {
        table: Arc::clone(table),
        current_age,
    };
    moments(params, &horizon)
}
