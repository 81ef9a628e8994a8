//! Monte Carlo oracle against the analytic transforms and pricers.

use num_complex::Complex64;

use three_halves::mc::{
    mc_expectations, mc_price, simulate_paths, McEstimate, PathSimulator, Product, Scheme, SimulationConfig,
};
use three_halves_core::model::{ModelParams, ThetaCurve};
use three_halves_core::pricers::{
    expected_quadratic_variation, fair_strike, price_european, EuropeanSpec, Lag, MomentSwapSpec, TimerOptionSpec,
    WeightKind,
};
use three_halves_core::quadrature::QuadratureConfig;
use three_halves_core::transforms::{joint_cf_h, transition_density_u, TransformPoint};

fn sim(n_paths: usize, seed: u64) -> SimulationConfig {
    SimulationConfig { n_paths, steps_per_year: 512, seed, scheme: Scheme::ExactVarianceTransition }
}

fn within(analytic: f64, mc: &McEstimate, z: f64) {
    assert!(
        mc.z_score(analytic) <= z,
        "analytic {analytic} vs MC {} ± {} (z = {:.2})",
        mc.mean,
        mc.std_error,
        mc.z_score(analytic)
    );
}

#[test]
fn parallel_ensemble_equals_sequential_paths() {
    let params = ModelParams::reference_sp500();
    let schedule = [0.0, 0.1, 0.3];
    let cfg = SimulationConfig { n_paths: 64, steps_per_year: 128, seed: 99, scheme: Scheme::ExactVarianceTransition };
    let ensemble = simulate_paths(&schedule, &params, &cfg).unwrap();
    let single = PathSimulator::new(&schedule, &params, &cfg).unwrap();
    for (k, path) in ensemble.iter().enumerate() {
        assert_eq!(*path, single.simulate(k as u64, true));
    }
}

#[test]
fn terminal_reciprocal_variance_follows_cir_density() {
    // composing exact transitions over 256 fine steps must reproduce the one-step law
    let params = ModelParams::reference_sp500();
    let n = 20_000;
    let paths = simulate_paths(&[0.0, 0.5], &params, &SimulationConfig { n_paths: n, ..sim(n, 21) }).unwrap();
    let mut u: Vec<f64> = paths.iter().map(|p| 1.0 / p.v[1]).collect();
    u.sort_by(f64::total_cmp);
    let u0 = 1.0 / params.v0;
    for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let x = u[(q * n as f64) as usize];
        // analytic CDF at the empirical quantile
        let steps = 4000;
        let h = x / steps as f64;
        let mut cdf = 0.0;
        for k in 0..steps {
            let a = k as f64 * h;
            let f = |y: f64| if y <= 0.0 { 0.0 } else { transition_density_u(0.0, u0, 0.5, y, &params).unwrap() };
            cdf += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
        }
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((cdf - q).abs() < 4.0 * se, "q = {q}: analytic CDF {cdf}");
    }
}

#[test]
fn discounted_price_is_a_martingale() {
    let params = ModelParams::reference_sp500();
    let t = 1.0;
    let growth = ((params.r - params.q) * t).exp();
    let [ratio] =
        mc_expectations(&[0.0, t], &params, &sim(40_000, 3), |p| [p.x[1].exp() / (params.s0 * growth)]).unwrap();
    within(1.0, &ratio, 3.0);
}

#[test]
fn log_price_cf_matches_transform() {
    let params = ModelParams::reference_sp500();
    let t = 0.5;
    let x0 = params.s0.ln();
    let omegas = [0.5, 1.0, 2.0];
    let est = mc_expectations(&[0.0, t], &params, &sim(100_000, 4), |p| {
        let d = p.x[1] - x0;
        [
            (omegas[0] * d).cos(),
            (omegas[0] * d).sin(),
            (omegas[1] * d).cos(),
            (omegas[1] * d).sin(),
            (omegas[2] * d).cos(),
            (omegas[2] * d).sin(),
        ]
    })
    .unwrap();
    for (k, &w) in omegas.iter().enumerate() {
        let h = joint_cf_h(0.0, params.v0, t, TransformPoint::real(w, 0.0), &params).unwrap();
        within(h.re, &est[2 * k], 3.0);
        within(h.im, &est[2 * k + 1], 3.0);
    }
}

#[test]
fn quadratic_variation_mean_matches_transform() {
    let params = ModelParams::reference_sp500();
    let t = 0.5;
    let [qv] = mc_expectations(&[0.0, t], &params, &sim(40_000, 5), |p| [p.i[1]]).unwrap();
    within(expected_quadratic_variation(t, &params).unwrap(), &qv, 3.0);
}

#[test]
fn joint_cf_with_variance_matches_transform() {
    let params = ModelParams::reference_sp500();
    let t = 0.5;
    let (w, e) = (1.0, 5.0);
    let x0 = params.s0.ln();
    let est = mc_expectations(&[0.0, t], &params, &sim(40_000, 6), |p| {
        let arg = w * (p.x[1] - x0) + e * p.i[1];
        [arg.cos(), arg.sin()]
    })
    .unwrap();
    let h: Complex64 = joint_cf_h(0.0, params.v0, t, TransformPoint::real(w, e), &params).unwrap();
    within(h.re, &est[0], 3.0);
    within(h.im, &est[1], 3.0);
}

#[test]
fn standard_error_shrinks_with_paths() {
    let params = ModelParams::reference_sp500();
    let product = Product::European(EuropeanSpec::call(100.0, 0.25));
    let a = mc_price(&product, &params, &sim(10_000, 7)).unwrap().estimate;
    let b = mc_price(&product, &params, &sim(20_000, 7)).unwrap().estimate;
    let ratio = b.std_error / a.std_error;
    assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.2, "SE ratio {ratio}");
}

#[test]
fn huge_budget_timer_is_european() {
    let params = ModelParams { rho: -0.5, v0: 0.087, ..ModelParams::reference_sp500() };
    let spec = TimerOptionSpec { strike: 100.0, maturity: 0.5, n_monitoring: 20, budget: 50.0 };
    let r = mc_price(&Product::Timer(spec), &params, &sim(40_000, 8)).unwrap();
    let euro = price_european(&EuropeanSpec::call(100.0, 0.5), &params, &QuadratureConfig::default()).unwrap();
    within(euro.value, &r.estimate, 3.0);
    assert_eq!(r.discrete_monitoring.unwrap().mean, r.estimate.mean);
}

#[test]
fn variance_and_price_ratio_swaps_match_analytic() {
    let params = ModelParams::reference_sp500();
    let cfg = QuadratureConfig::default();
    for weight in [WeightKind::Constant, WeightKind::PriceRatio(Lag::Previous)] {
        let spec = MomentSwapSpec::uniform(0.5, 12, 2, weight);
        let analytic = fair_strike(&spec, &params, &cfg).unwrap().strike;
        let mc = mc_price(&Product::Swap(spec), &params, &sim(40_000, 9)).unwrap().estimate;
        within(analytic, &mc, 3.0);
    }
}

#[test]
fn euler_scheme_agrees_with_exact_transitions() {
    // moderate vol-of-vol keeps full truncation from sticking at zero
    let params = ModelParams {
        kappa: 5.0,
        epsilon: 1.5,
        rho: -0.7,
        theta: ThetaCurve::constant(5.0 * 0.05),
        v0: 0.05,
        ..ModelParams::reference_sp500()
    };
    let product = Product::European(EuropeanSpec::call(100.0, 0.5));
    let analytic =
        price_european(&EuropeanSpec::call(100.0, 0.5), &params, &QuadratureConfig::default()).unwrap().value;
    let exact = mc_price(&product, &params, &sim(40_000, 10)).unwrap().estimate;
    let euler_cfg = SimulationConfig { scheme: Scheme::EulerFullTruncation, steps_per_year: 1024, ..sim(40_000, 10) };
    let euler = mc_price(&product, &params, &euler_cfg).unwrap().estimate;
    within(analytic, &exact, 3.0);
    within(analytic, &euler, 3.0);
}

#[test]
fn step_halving_leaves_the_price_unchanged() {
    let params = ModelParams::reference_sp500();
    let product = Product::European(EuropeanSpec::call(100.0, 0.5));
    let coarse =
        mc_price(&product, &params, &SimulationConfig { steps_per_year: 256, ..sim(40_000, 12) }).unwrap().estimate;
    let fine = mc_price(&product, &params, &sim(40_000, 12)).unwrap().estimate;
    let combined = coarse.std_error.hypot(fine.std_error);
    assert!((coarse.mean - fine.mean).abs() < 3.0 * combined, "{} vs {}", coarse.mean, fine.mean);
}
