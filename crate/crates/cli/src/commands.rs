use std::fs::File;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use annuity_core::monte_carlo::{simulate_j_extrapolated, z_score, Schedule, SimConfig};
use annuity_core::mortality::{life_moments, load_life_table};
use annuity_core::{
    density_from_table, implied_sigma, moments, spread, DiscountMoments, Horizon, LifeTable,
    MarketParams, Problem, Quote,
};

use crate::{
    Direction, Failure, Format, ImpliedArgs, LifeQuoteArgs, Quantity, QuoteArgs, Rendered,
    SweepArgs, ValidateArgs,
};

/// Largest |z| accepted by `validate`.
const Z_MAX: f64 = 3.0;
/// Discretization allowance for `validate`, relative to each quantity's scale.
const ALLOWANCE_RTOL: f64 = 1e-9;
const SIGMA_LIMIT: f64 = 2.0;

pub enum Document {
    Quote(QuoteDoc),
    Sweep(SweepDoc),
    Validate(ValidateDoc),
    Implied(ImpliedDoc),
}

#[derive(Serialize)]
pub struct QuoteDoc {
    direction: &'static str,
    r: f64,
    sigma: f64,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    life_table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    age: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_lifetime: Option<f64>,
    a: f64,
    u: f64,
    risk_second_moment: f64,
    m1: f64,
    m2: f64,
    spread_ratio: f64,
}

#[derive(Serialize)]
pub struct SweepDoc {
    quantity: &'static str,
    r: f64,
    #[serde(rename = "T")]
    t: f64,
    rows: Vec<SweepRow>,
}

#[derive(Serialize)]
struct SweepRow {
    sigma: f64,
    value: f64,
}

#[derive(Serialize)]
pub struct ValidateDoc {
    r: f64,
    sigma: f64,
    #[serde(rename = "T")]
    t: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    antithetic: bool,
    z_max: f64,
    passed: bool,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct Check {
    quantity: &'static str,
    closed_form: f64,
    monte_carlo: f64,
    std_error: f64,
    z_score: f64,
    passed: bool,
}

#[derive(Serialize)]
pub struct ImpliedDoc {
    direction: &'static str,
    r: f64,
    #[serde(rename = "T")]
    t: f64,
    amount_in: f64,
    amount_out: f64,
    sigma: f64,
}

fn problem(direction: Direction) -> Problem {
    match direction {
        Direction::Price => Problem::PriceGivenPayment,
        Direction::Payment => Problem::PaymentGivenPrice,
    }
}

fn direction_name(direction: Direction) -> &'static str {
    match direction {
        Direction::Price => "price",
        Direction::Payment => "payment",
    }
}

fn quote_doc(
    direction: Direction,
    params: &MarketParams,
    m: &DiscountMoments,
    amount: f64,
    round_dollars: bool,
) -> Result<QuoteDoc, Failure> {
    let q = Quote::solve(problem(direction), amount, m)?;
    let dollars = |x: f64| if round_dollars { x.round() } else { x };
    Ok(QuoteDoc {
        direction: direction_name(direction),
        r: params.r(),
        sigma: params.sigma(),
        t: None,
        life_table: None,
        age: None,
        expected_lifetime: None,
        a: dollars(q.a),
        u: dollars(q.u),
        risk_second_moment: q.risk_second_moment,
        m1: m.m1(),
        m2: m.m2(),
        spread_ratio: m.spread_ratio(),
    })
}

fn read_table(path: &Path) -> Result<Arc<LifeTable>, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::input(format!("cannot open {}: {e}", path.display())))?;
    let table = load_life_table(file).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })?;
    Ok(Arc::new(table))
}

fn life_doc(
    path: &Path,
    age: u32,
    params: &MarketParams,
    direction: Direction,
    amount: f64,
    round_dollars: bool,
) -> Result<QuoteDoc, Failure> {
    let table = read_table(path)?;
    let m = life_moments(&table, age, params)?;
    let lifetime = density_from_table(&table, age)?.expected_lifetime();
    let mut doc = quote_doc(direction, params, &m, amount, round_dollars)?;
    doc.life_table = Some(path.display().to_string());
    doc.age = Some(age);
    doc.expected_lifetime = Some(lifetime);
    Ok(doc)
}

pub fn quote(args: &QuoteArgs) -> Result<Document, Failure> {
    let params = MarketParams::new(args.r, args.sigma)?;
    let doc = match (&args.life_table, args.age, args.t) {
        (Some(path), Some(age), _) => life_doc(
            path,
            age,
            &params,
            args.direction,
            args.amount,
            args.round_dollars,
        )?,
        (_, _, Some(t)) => {
            let m = moments(&params, &Horizon::fixed(t)?)?;
            let mut doc = quote_doc(args.direction, &params, &m, args.amount, args.round_dollars)?;
            doc.t = Some(t);
            doc
        }
        _ => return Err(Failure::input("give either --T or --life-table with --age")),
    };
    Ok(Document::Quote(doc))
}

pub fn life_quote(args: &LifeQuoteArgs) -> Result<Document, Failure> {
    let params = MarketParams::new(args.r, args.sigma)?;
    let doc = life_doc(
        &args.life_table,
        args.age,
        &params,
        args.direction,
        args.amount,
        args.round_dollars,
    )?;
    Ok(Document::Quote(doc))
}

pub fn sweep(args: &SweepArgs) -> Result<Document, Failure> {
    let (lo, hi, step) = (args.sigma_min, args.sigma_max, args.step);
    if !(0.0..=SIGMA_LIMIT).contains(&lo) || !(0.0..=SIGMA_LIMIT).contains(&hi) || lo > hi {
        return Err(Failure::input(format!(
            "sigma range [{lo}, {hi}] must lie within [0, {SIGMA_LIMIT}]"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Failure::input(format!(
            "--step must be positive, got {step}"
        )));
    }
    let horizon = Horizon::fixed(args.t)?;
    let count = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        // Snap to 12 decimals so grid points print as typed.
        let sigma = ((lo + step * i as f64) * 1e12).round() / 1e12;
        let m = moments(&MarketParams::new(args.r, sigma)?, &horizon)?;
        let s = spread(1.0, 1.0, &m)?;
        let value = match args.quantity {
            Quantity::AHat => m.m1(),
            Quantity::UHat => s.u_hat_over_a,
            Quantity::Diff => s.difference,
            Quantity::Ratio => s.ratio,
        };
        rows.push(SweepRow { sigma, value });
    }
    let quantity = match args.quantity {
        Quantity::AHat => "a_hat",
        Quantity::UHat => "u_hat",
        Quantity::Diff => "diff",
        Quantity::Ratio => "ratio",
    };
    Ok(Document::Sweep(SweepDoc {
        quantity,
        r: args.r,
        t: args.t,
        rows,
    }))
}

fn check(quantity: &'static str, closed: f64, mc: f64, se: f64, scale: f64) -> Check {
    let deviation = mc - closed;
    let shrunk = deviation.signum() * (deviation.abs() - ALLOWANCE_RTOL * scale).max(0.0);
    let z = z_score(shrunk, se);
    Check {
        quantity,
        closed_form: closed,
        monte_carlo: mc,
        std_error: se,
        z_score: z,
        passed: z.abs() <= Z_MAX,
    }
}

pub fn validate(args: &ValidateArgs) -> Result<Document, Failure> {
    let params = MarketParams::new(args.r, args.sigma)?;
    let horizon = Horizon::fixed(args.t)?;
    let m = moments(&params, &horizon)?;
    let cfg = SimConfig {
        n_paths: args.n_paths,
        n_steps: args.n_steps,
        seed: args.seed,
        antithetic: args.antithetic,
    };
    let est = simulate_j_extrapolated(&Schedule::constant(&params), &horizon, &cfg)?;
    let (r1, r1_se) = est.residual_risk_price();
    let (r2, r2_se) = est.residual_risk_payment();
    let checks = vec![
        check("m1", m.m1(), est.mean, est.std_error_mean, m.m1()),
        check(
            "m2",
            m.m2(),
            est.second_moment,
            est.std_error_second_moment,
            m.m2(),
        ),
        check("R1", m.variance(), r1, r1_se, m.m2()),
        check("R2", 1.0 - m.spread_ratio(), r2, r2_se, 1.0),
    ];
    Ok(Document::Validate(ValidateDoc {
        r: args.r,
        sigma: args.sigma,
        t: args.t,
        n_paths: args.n_paths,
        n_steps: args.n_steps,
        seed: args.seed,
        antithetic: args.antithetic,
        z_max: Z_MAX,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }))
}

pub fn implied(args: &ImpliedArgs) -> Result<Document, Failure> {
    let (a, u) = match args.direction {
        Direction::Price => (args.amount_out, args.amount_in),
        Direction::Payment => (args.amount_in, args.amount_out),
    };
    let quote = Quote {
        problem: problem(args.direction),
        a,
        u,
        risk_second_moment: f64::NAN,
    };
    let sigma = implied_sigma(&quote, args.r, args.t)?;
    Ok(Document::Implied(ImpliedDoc {
        direction: direction_name(args.direction),
        r: args.r,
        t: args.t,
        amount_in: args.amount_in,
        amount_out: args.amount_out,
        sigma,
    }))
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::input(format!("cannot encode JSON: {e}")))
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Failure::input(format!("cannot encode CSV: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Failure::input(format!("cannot encode CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Failure::input(e.to_string()))
}

pub fn render(doc: &Document, format: Format) -> Result<Rendered, Failure> {
    let passed = match doc {
        Document::Validate(v) => v.passed,
        _ => true,
    };
    let body = match (doc, format) {
        (Document::Quote(d), Format::Json) => json(d)?,
        (Document::Quote(d), Format::Csv) => csv_rows(std::slice::from_ref(d))?,
        (Document::Sweep(d), Format::Json) => json(d)?,
        (Document::Sweep(d), Format::Csv) => csv_rows(&d.rows)?,
        (Document::Validate(d), Format::Json) => json(d)?,
        (Document::Validate(d), Format::Csv) => csv_rows(&d.checks)?,
        (Document::Implied(d), Format::Json) => json(d)?,
        (Document::Implied(d), Format::Csv) => csv_rows(std::slice::from_ref(d))?,
    };
    Ok(Rendered { body, passed })
}
