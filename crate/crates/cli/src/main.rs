//! `annuity`: quotes, σ sweeps, Monte Carlo validation, life-table quotes and
//! implied volatility from the command line.

mod commands;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use annuity_core::PricingError;

#[derive(Parser, Debug)]
#[command(name = "annuity", version, about = "Risk-minimizing annuity quotes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal price for a payment rate, or payment rate for a price.
    Quote(QuoteArgs),
    /// Quote quantities over a range of volatilities, with a = 1 or u = 1.
    Sweep(SweepArgs),
    /// Compare closed-form moments against a Monte Carlo run.
    Validate(ValidateArgs),
    /// Volatility implied by an observed price/payment pair.
    Implied(ImpliedArgs),
    /// Quote a life annuity from a mortality table.
    LifeQuote(LifeQuoteArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Solve for the price given a payment rate.
    Price,
    /// Solve for the payment rate given a price.
    Payment,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    AHat,
    UHat,
    Diff,
    Ratio,
}

#[derive(Args, Debug)]
pub struct QuoteArgs {
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long)]
    sigma: f64,
    /// Fixed horizon in years.
    #[arg(
        long = "T",
        required_unless_present = "life_table",
        conflicts_with = "life_table"
    )]
    t: Option<f64>,
    /// Life-table CSV with columns `age,qx`; replaces --T.
    #[arg(long, requires = "age")]
    life_table: Option<PathBuf>,
    #[arg(long, requires = "life_table")]
    age: Option<u32>,
    #[arg(long, value_enum)]
    direction: Direction,
    /// Payment rate when solving for the price, price when solving for the payment.
    #[arg(long)]
    amount: f64,
    /// Round prices and payment rates to whole dollars.
    #[arg(long)]
    round_dollars: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct LifeQuoteArgs {
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    life_table: PathBuf,
    #[arg(long)]
    age: u32,
    #[arg(long, value_enum)]
    direction: Direction,
    #[arg(long)]
    amount: f64,
    #[arg(long)]
    round_dollars: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long = "T")]
    t: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma_min: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, value_enum)]
    quantity: Quantity,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long = "T")]
    t: f64,
    #[arg(long, default_value_t = 1_000_000)]
    n_paths: usize,
    /// Coarse steps per year; the fine grid halves them.
    #[arg(long, default_value_t = 100)]
    n_steps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    antithetic: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ImpliedArgs {
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long = "T")]
    t: f64,
    /// The quantity that was solved for.
    #[arg(long, value_enum)]
    direction: Direction,
    /// The given amount: payment rate for `price`, price for `payment`.
    #[arg(long)]
    amount_in: f64,
    /// The quoted amount: price for `price`, payment rate for `payment`.
    #[arg(long)]
    amount_out: f64,
    #[command(flatten)]
    out: OutputArgs,
}

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;

/// A failed run: exit code plus a message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            kind: "input",
            message: message.into(),
        }
    }
}

impl From<PricingError> for Failure {
    fn from(e: PricingError) -> Self {
        let (code, kind) = match &e {
            e if e.is_input_error() => (EXIT_INPUT, "input"),
            PricingError::InversionInfeasible { .. } | PricingError::NonMonotone { .. } => {
                (EXIT_NUMERICAL, "inversion")
            }
            PricingError::Domain { .. } => (EXIT_NUMERICAL, "domain"),
            _ => (EXIT_NUMERICAL, "numerical"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// Rendered output and whether the run counts as a success.
pub struct Rendered {
    pub body: String,
    pub passed: bool,
}

fn write_output(out: &OutputArgs, body: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => File::create(path)
            .and_then(|mut f| f.write_all(body.as_bytes()))
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::input(format!("cannot write to standard output: {e}"))),
    }
}

fn report(failure: &Failure, format: Format) {
    match format {
        Format::Json => {
            let doc = serde_json::json!({
                "error": {
                    "kind": failure.kind,
                    "message": failure.message,
                    "exit_code": failure.code,
                }
            });
            eprintln!("{doc}");
        }
        Format::Csv => eprintln!("error: {}", failure.message),
    }
}

/// Output format requested on the raw command line, for errors raised
/// before the arguments parse.
fn requested_format(args: &[String]) -> Format {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let value = match arg.strip_prefix("--format") {
            Some("") => iter.next().map(String::as_str),
            Some(rest) => rest.strip_prefix('='),
            None => None,
        };
        if value == Some("csv") {
            return Format::Csv;
        }
    }
    Format::Json
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = Failure::input(e.render().to_string().trim_end());
            report(&failure, requested_format(&args));
            return ExitCode::from(EXIT_INPUT);
        }
    };

    let (out, format, result) = match &cli.command {
        Command::Quote(a) => (&a.out, fmt(&a.out, Format::Json), commands::quote(a)),
        Command::LifeQuote(a) => (&a.out, fmt(&a.out, Format::Json), commands::life_quote(a)),
        Command::Sweep(a) => (&a.out, fmt(&a.out, Format::Csv), commands::sweep(a)),
        Command::Validate(a) => (&a.out, fmt(&a.out, Format::Json), commands::validate(a)),
        Command::Implied(a) => (&a.out, fmt(&a.out, Format::Json), commands::implied(a)),
    };
    let outcome = result
        .and_then(|doc| commands::render(&doc, format))
        .and_then(|rendered| write_output(out, &rendered.body).map(|()| rendered.passed));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(failure) => {
            report(&failure, format);
            ExitCode::from(failure.code)
        }
    }
}

fn fmt(out: &OutputArgs, default: Format) -> Format {
    out.format.unwrap_or(default)
}
