use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_annuity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn base(direction: &str, amount: &str, sigma: &str) -> Vec<String> {
    [
        "quote",
        "--r",
        "0.05",
        "--sigma",
        sigma,
        "--T",
        "20",
        "--direction",
        direction,
        "--amount",
        amount,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run_owned(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

#[test]
fn payment_for_a_price() {
    let out = run_owned(&base("payment", "100000", "0.2"));
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["u"].as_f64().unwrap().round(), 4206.0);
    assert_eq!(doc["a"].as_f64().unwrap(), 100000.0);
    for key in ["risk_second_moment", "m1", "m2", "spread_ratio"] {
        assert!(doc[key].is_number(), "{key}");
    }
}

#[test]
fn price_for_a_payment() {
    let out = run_owned(&base("price", "5000", "0.2"));
    assert!(out.status.success());
    assert_eq!(json(&out)["a"].as_f64().unwrap().round(), 90635.0);
}

#[test]
fn dollar_rounding_is_presentation_only() {
    let mut args = base("price", "5000", "0.2");
    args.push("--round-dollars".into());
    let doc = json(&run_owned(&args));
    assert_eq!(doc["a"].as_f64().unwrap(), 90635.0);
}

#[test]
fn deterministic_limit() {
    let doc = json(&run_owned(&base("price", "1", "0")));
    let a = doc["a"].as_f64().unwrap();
    assert!((a - 12.642411176571153).abs() < 1e-12);
    assert_eq!(doc["risk_second_moment"].as_f64().unwrap(), 0.0);
}

#[test]
fn output_is_byte_stable() {
    let a = run_owned(&base("payment", "100000", "0.2"));
    let b = run_owned(&base("payment", "100000", "0.2"));
    assert_eq!(a.stdout, b.stdout);
    let v = [
        "validate",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--T",
        "5",
        "--n-paths",
        "2000",
        "--n-steps",
        "10",
    ];
    assert_eq!(run(&v).stdout, run(&v).stdout);
}

#[test]
fn csv_quote_has_header() {
    let mut args = base("payment", "100000", "0.2");
    args.extend(["--format".into(), "csv".into()]);
    let out = run_owned(&args);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "direction,r,sigma,T,a,u,risk_second_moment,m1,m2,spread_ratio"
    );
    assert!(lines
        .next()
        .unwrap()
        .starts_with("payment,0.05,0.2,20.0,100000.0,4206.2"));
}

fn sweep(quantity: &str, lo: &str) -> Vec<(f64, f64)> {
    let out = run(&[
        "sweep",
        "--r",
        "0.05",
        "--T",
        "20",
        "--sigma-min",
        lo,
        "--sigma-max",
        "0.5",
        "--step",
        "0.01",
        "--quantity",
        quantity,
    ]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["sigma", "value"]);
    reader
        .deserialize::<(f64, f64)>()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn ratio_sweep_stays_below_one() {
    let rows = sweep("ratio", "0.01");
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0].0, 0.01);
    assert_eq!(rows[49].0, 0.5);
    assert!(rows.iter().all(|&(_, v)| v < 1.0));
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn diff_sweep_is_positive_and_falls_after_its_peak() {
    let rows = sweep("diff", "0.01");
    assert!(rows.iter().all(|&(_, v)| v > 0.0));
    let peak = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .unwrap()
        .0;
    assert!(peak < rows.len() - 1);
    assert!(rows[peak..].windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn price_sweep_starts_at_annuity_factor() {
    let rows = sweep("a_hat", "0");
    assert_eq!(rows[0].0, 0.0);
    assert!((rows[0].1 - 12.642411176571153).abs() < 1e-12);
}

#[test]
fn sweep_range_is_checked() {
    let out = run(&[
        "sweep",
        "--r",
        "0.05",
        "--T",
        "20",
        "--sigma-max",
        "2.5",
        "--quantity",
        "ratio",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "sweep",
        "--r",
        "0.05",
        "--T",
        "20",
        "--step",
        "0",
        "--quantity",
        "ratio",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn implied(direction: &str, amount_in: &str, amount_out: &str) -> Output {
    run(&[
        "implied",
        "--r",
        "0.05",
        "--T",
        "20",
        "--direction",
        direction,
        "--amount-in",
        amount_in,
        "--amount-out",
        amount_out,
    ])
}

#[test]
fn implied_sigma_round_trip() {
    for (direction, amount) in [("payment", "100000"), ("price", "5000")] {
        let doc = json(&run_owned(&base(direction, amount, "0.2")));
        let output = if direction == "payment" {
            &doc["u"]
        } else {
            &doc["a"]
        };
        let out = implied(direction, amount, &output.as_f64().unwrap().to_string());
        assert!(out.status.success());
        let sigma = json(&out)["sigma"].as_f64().unwrap();
        assert!((sigma - 0.2).abs() < 1e-6, "{direction}: {sigma}");
    }
}

#[test]
fn implied_sigma_for_deterministic_pair_is_zero() {
    let factor = -f64::exp_m1(-1.0) / 0.05;
    let out = implied("price", "1", &factor.to_string());
    assert!(out.status.success());
    assert_eq!(json(&out)["sigma"].as_f64().unwrap(), 0.0);
}

#[test]
fn infeasible_pair_exits_3_with_json_error() {
    // Volatility only raises the price, so nothing reaches below the
    // deterministic annuity factor 12.64.
    let out = implied("price", "1", "10");
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["exit_code"], 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_input_exits_2() {
    let out = run_owned(&base("payment", "-5", "0.2"));
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "input");

    let out = run(&[
        "quote",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--direction",
        "price",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "quote",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--T",
        "20",
        "--direction",
        "both",
        "--amount",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn overflowing_parameters_exit_3() {
    let out = run(&[
        "quote",
        "--r",
        "0",
        "--sigma",
        "2",
        "--T",
        "100",
        "--direction",
        "price",
        "--amount",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validation_passes_on_a_sound_run() {
    let out = run(&[
        "validate",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--T",
        "20",
        "--n-paths",
        "50000",
        "--n-steps",
        "20",
        "--seed",
        "42",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let doc = json(&out);
    assert_eq!(doc["passed"], true);
    let names: Vec<&str> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["quantity"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["m1", "m2", "R1", "R2"]);
}

#[test]
fn validation_without_volatility_passes() {
    let out = run(&[
        "validate",
        "--r",
        "0.05",
        "--sigma",
        "0",
        "--T",
        "20",
        "--n-paths",
        "100",
        "--n-steps",
        "10",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn coarse_validation_fails_with_exit_4_and_keeps_report() {
    // One step per year leaves a trapezoid bias that no sampling noise hides.
    let out = run(&[
        "validate",
        "--r",
        "0.05",
        "--sigma",
        "0",
        "--T",
        "20",
        "--n-paths",
        "100",
        "--n-steps",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("quantity,closed_form,monte_carlo,std_error,z_score,passed"));
}

#[test]
fn life_quote_from_csv() {
    let dir = std::env::temp_dir().join(format!("annuity-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.csv");
    let mut text = String::from("age,qx\n");
    for age in 60..100 {
        text.push_str(&format!("{age},0.05\n"));
    }
    text.push_str("100,1\n");
    std::fs::write(&path, text).unwrap();
    let path = path.to_str().unwrap();

    let life = run(&[
        "life-quote",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--life-table",
        path,
        "--age",
        "65",
        "--direction",
        "payment",
        "--amount",
        "100000",
    ]);
    assert!(
        life.status.success(),
        "{}",
        String::from_utf8_lossy(&life.stderr)
    );
    let doc = json(&life);
    assert_eq!(doc["age"], 65);
    assert!(doc["expected_lifetime"].as_f64().unwrap() > 10.0);

    let quote = run(&[
        "quote",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--life-table",
        path,
        "--age",
        "65",
        "--direction",
        "payment",
        "--amount",
        "100000",
    ]);
    assert_eq!(json(&quote)["u"], doc["u"]);

    let too_old = run(&[
        "life-quote",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--life-table",
        path,
        "--age",
        "101",
        "--direction",
        "payment",
        "--amount",
        "1",
    ]);
    assert_eq!(too_old.status.code(), Some(2));
    let missing = run(&[
        "life-quote",
        "--r",
        "0.05",
        "--sigma",
        "0.2",
        "--life-table",
        "/nonexistent/table.csv",
        "--age",
        "65",
        "--direction",
        "payment",
        "--amount",
        "1",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
