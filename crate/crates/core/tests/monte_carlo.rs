use annuity_core::monte_carlo::{
    hedging_error_distribution, simulate_j, simulate_j_extrapolated, z_score, HorizonSampler,
    Schedule, SimConfig,
};
use annuity_core::{moments, Horizon, MarketParams, TabulatedDensity};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(n_paths: usize, n_steps: usize, seed: u64, antithetic: bool) -> SimConfig {
    SimConfig {
        n_paths,
        n_steps,
        seed,
        antithetic,
    }
}

fn params(r: f64, sigma: f64) -> MarketParams {
    MarketParams::new(r, sigma).unwrap()
}

#[test]
fn moments_agree_with_closed_forms() {
    for &(r, sigma, t) in &[(0.05, 0.2, 20.0), (0.01, 0.05, 5.0), (0.1, 0.2, 40.0)] {
        let p = params(r, sigma);
        let m = moments(&p, &Horizon::Fixed(t)).unwrap();
        let est = simulate_j_extrapolated(
            &Schedule::constant(&p),
            &Horizon::Fixed(t),
            &cfg(100_000, 20, 11, false),
        )
        .unwrap();
        let (z1, z2) = (est.z_score_mean(m.m1()), est.z_score_second_moment(m.m2()));
        assert!(z1.abs() <= 3.0, "({r}, {sigma}, {t}): z_m1 = {z1}");
        assert!(z2.abs() <= 3.0, "({r}, {sigma}, {t}): z_m2 = {z2}");
        assert!(est.variance >= 0.0);
    }
}

#[test]
fn piecewise_schedule_matches_its_exact_moments() {
    // E B(s,0)⁻¹ = exp(∫(σ² - r)), integrated piece by piece.
    let schedule = Schedule::new(vec![0.0, 5.0], vec![0.03, 0.06], vec![0.1, 0.25]).unwrap();
    let est = simulate_j_extrapolated(&schedule, &Horizon::Fixed(10.0), &cfg(50_000, 20, 5, true))
        .unwrap();
    let (g1, g2) = (0.01 - 0.03, 0.0625 - 0.06);
    let first = f64::exp_m1(5.0 * g1) / g1;
    let second = f64::exp(5.0 * g1) * f64::exp_m1(5.0 * g2) / g2;
    let z = est.z_score_mean(first + second);
    assert!(z.abs() <= 3.0, "z = {z}");
}

#[test]
fn random_horizon_composes_with_density_moments() {
    let p = params(0.05, 0.2);
    let d = TabulatedDensity::from_bins(&[10.0, 20.0, 30.0], &[0.06, 0.04]).unwrap();
    let horizon = Horizon::Density(d);
    let m = moments(&p, &horizon).unwrap();
    let est = simulate_j_extrapolated(
        &Schedule::constant(&p),
        &horizon,
        &cfg(100_000, 20, 3, false),
    )
    .unwrap();
    let (z1, z2) = (est.z_score_mean(m.m1()), est.z_score_second_moment(m.m2()));
    assert!(z1.abs() <= 3.0, "z_m1 = {z1}");
    assert!(z2.abs() <= 3.0, "z_m2 = {z2}");
}

#[test]
fn antithetic_pairs_do_not_increase_standard_error() {
    for &r in &[0.01, 0.05, 0.1] {
        for &sigma in &[0.05, 0.2, 0.4] {
            for &t in &[5.0, 20.0] {
                let s = Schedule::constant(&params(r, sigma));
                let h = Horizon::Fixed(t);
                let plain = simulate_j(&s, &h, &cfg(20_000, 10, 17, false)).unwrap();
                let anti = simulate_j(&s, &h, &cfg(20_000, 10, 17, true)).unwrap();
                assert!(
                    anti.std_error_mean <= plain.std_error_mean,
                    "({r}, {sigma}, {t}): {} > {}",
                    anti.std_error_mean,
                    plain.std_error_mean
                );
            }
        }
    }
}

#[test]
fn trapezoid_error_shrinks_fourfold_per_halving() {
    let p = params(0.05, 0.0);
    let exact = -f64::exp_m1(-1.0) / 0.05;
    let err = |n| {
        simulate_j(
            &Schedule::constant(&p),
            &Horizon::Fixed(20.0),
            &cfg(2, n, 1, false),
        )
        .unwrap()
        .mean
            - exact
    };
    for n in [1, 2, 4, 8] {
        let ratio = err(n) / err(2 * n);
        assert!(ratio >= 3.5, "n = {n}: ratio {ratio}");
    }
}

#[test]
fn hedging_error_matches_residual_risks() {
    let p = params(0.05, 0.2);
    let h = Horizon::Fixed(20.0);
    let m = moments(&p, &h).unwrap();
    let c = cfg(100_000, 50, 23, false);

    let price_side =
        hedging_error_distribution(m.m1(), 1.0, &Schedule::constant(&p), &h, &c).unwrap();
    let z = z_score(
        price_side.second_moment - m.variance(),
        price_side.std_error_second_moment,
    );
    assert!(z.abs() <= 3.0, "price side z = {z}");

    let u = m.m1() / m.m2();
    let pay_side = hedging_error_distribution(1.0, u, &Schedule::constant(&p), &h, &c).unwrap();
    let z = z_score(
        pay_side.second_moment - (1.0 - m.spread_ratio()),
        pay_side.std_error_second_moment,
    );
    assert!(z.abs() <= 3.0, "payment side z = {z}");
    assert!(pay_side
        .quantiles
        .windows(2)
        .all(|w| w[0].value <= w[1].value));
}

#[test]
fn perfect_hedge_without_volatility() {
    let p = params(0.05, 0.0);
    let a = -f64::exp_m1(-1.0) / 0.05;
    let stats = hedging_error_distribution(
        a,
        1.0,
        &Schedule::constant(&p),
        &Horizon::Fixed(20.0),
        &cfg(100, 100, 2, false),
    )
    .unwrap();
    let h: f64 = 0.01;
    assert!(stats.mean.abs() <= 20.0 * h * h * 0.05 * 0.05 / 12.0);
}

#[test]
fn truncated_exponential_sampling_passes_ks() {
    let (hazard, cap) = (0.1, 60.0);
    let norm = -f64::exp_m1(-hazard * cap);
    let n = 6000;
    let pts: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let t = cap * i as f64 / n as f64;
            (t, hazard * (-hazard * t).exp() / norm)
        })
        .collect();
    let sampler = HorizonSampler::new(&Horizon::Density(
        TabulatedDensity::from_samples(&pts).unwrap(),
    ))
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 100_000;
    let mut xs: Vec<f64> = (0..draws).map(|_| sampler.sample(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let cdf = |t: f64| -f64::exp_m1(-hazard * t) / norm;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / draws as f64)
                .abs()
                .max((i as f64 + 1.0) / draws as f64 - f)
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "KS statistic {ks}");
}

#[test]
fn bit_identical_reruns() {
    let p = params(0.05, 0.2);
    let c = cfg(10_000, 10, 42, true);
    let a = simulate_j_extrapolated(&Schedule::constant(&p), &Horizon::Fixed(20.0), &c).unwrap();
    let b = simulate_j_extrapolated(&Schedule::constant(&p), &Horizon::Fixed(20.0), &c).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.second_moment.to_bits(), b.second_moment.to_bits());
}
