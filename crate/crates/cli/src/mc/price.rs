use num_complex::Complex64;

use three_halves_core::model::ModelParams;
use three_halves_core::pricers::{EuropeanSpec, MomentSwapSpec, TimerOptionSpec};
use three_halves_core::quadrature::CompensatedSum;
use three_halves_core::Result;

use super::paths::{PathSample, PathSimulator};
use super::{parallel_map, SimulationConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Product {
    European(EuropeanSpec),
    Timer(TimerOptionSpec),
    Swap(MomentSwapSpec),
}

impl Product {
    pub fn schedule(&self) -> Vec<f64> {
        match self {
            Product::European(e) => vec![0.0, e.maturity],
            Product::Timer(t) => t.monitoring_dates(),
            Product::Swap(s) => s.schedule.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Product::European(e) => e.validate(),
            Product::Timer(t) => t.validate(),
            Product::Swap(s) => s.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// Mean and standard error of `samples`, summed in order with compensation.
    pub fn from_samples(samples: impl Iterator<Item = f64> + Clone) -> Self {
        let n = samples.clone().count();
        let sum: CompensatedSum = samples.clone().map(|s| Complex64::new(s, 0.0)).collect();
        let mean = sum.total().re / n as f64;
        let sq: CompensatedSum = samples.map(|s| Complex64::new((s - mean) * (s - mean), 0.0)).collect();
        let var = if n > 1 { sq.total().re / (n - 1) as f64 } else { 0.0 };
        Self { mean, std_error: (var / n as f64).sqrt(), n_paths: n }
    }

    /// `|value - mean|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean).abs() / self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McReport {
    /// Price or fair strike; the timer uses the quadratic-variation proxy.
    pub estimate: McEstimate,
    /// Timer stopped on discrete realized variance instead.
    pub discrete_monitoring: Option<McEstimate>,
}

/// Estimates of `E[f(path)]` component-wise over `sim.n_paths` paths.
pub fn mc_expectations<const K: usize>(
    schedule: &[f64],
    params: &ModelParams,
    sim: &SimulationConfig,
    f: impl Fn(&PathSample) -> [f64; K] + Sync,
) -> Result<[McEstimate; K]> {
    let simulator = PathSimulator::new(schedule, params, sim)?;
    let values = parallel_map(sim.n_paths, |k| f(&simulator.simulate(k as u64, false)));
    Ok(std::array::from_fn(|c| McEstimate::from_samples(values.iter().map(move |v| v[c]))))
}

fn timer_payoff(spec: &TimerOptionSpec, r: f64, path: &PathSample, qv: &[f64]) -> f64 {
    let n = spec.n_monitoring;
    let stop = (1..=n).find(|&j| qv[j] >= spec.budget).unwrap_or(n);
    (-r * path.times[stop]).exp() * (path.x[stop].exp() - spec.strike).max(0.0)
}

fn swap_leg_sum(spec: &MomentSwapSpec, s0: f64, path: &PathSample) -> f64 {
    let n = spec.periods();
    let mut acc = CompensatedSum::new();
    for k in 1..=n {
        let w = spec.weight.value(path.x[spec.weight.index(k, n)].exp(), s0);
        let ret = path.x[k] - path.x[k - 1];
        acc.add(Complex64::new(w * ret.powi(spec.moment as i32), 0.0));
    }
    acc.total().re / spec.maturity()
}

/// Pathwise price (or fair strike for swaps) with its standard error.
pub fn mc_price(product: &Product, params: &ModelParams, sim: &SimulationConfig) -> Result<McReport> {
    product.validate()?;
    let schedule = product.schedule();
    let r = params.r;
    match product {
        Product::European(e) => {
            let [est] = mc_expectations(&schedule, params, sim, |p| {
                let s = p.x[1].exp();
                let payoff = if e.is_call { s - e.strike } else { e.strike - s };
                [(-r * e.maturity).exp() * payoff.max(0.0)]
            })?;
            Ok(McReport { estimate: est, discrete_monitoring: None })
        }
        Product::Timer(t) => {
            let [proxy, discrete] = mc_expectations(&schedule, params, sim, |p| {
                [timer_payoff(t, r, p, &p.i), timer_payoff(t, r, p, &p.i_discrete)]
            })?;
            Ok(McReport { estimate: proxy, discrete_monitoring: Some(discrete) })
        }
        Product::Swap(s) => {
            let s0 = params.s0;
            let [est] = mc_expectations(&schedule, params, sim, |p| [swap_leg_sum(s, s0, p)])?;
            Ok(McReport { estimate: est, discrete_monitoring: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Scheme;

    #[test]
    fn estimate_of_constant_samples() {
        let e = McEstimate::from_samples([2.0, 2.0, 2.0].into_iter());
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.std_error, 0.0);
        let e = McEstimate::from_samples([1.0, 3.0].into_iter());
        assert_eq!(e.mean, 2.0);
        assert!((e.std_error - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_strike_call_is_discounted_forward() {
        let params = ModelParams::reference_sp500();
        let sim =
            SimulationConfig { n_paths: 4000, steps_per_year: 64, seed: 5, scheme: Scheme::ExactVarianceTransition };
        let r = mc_price(&Product::European(EuropeanSpec::call(1e-12, 0.5)), &params, &sim).unwrap();
        let fwd = params.s0 * (-params.q * 0.5).exp();
        assert!(r.estimate.z_score(fwd) < 3.0, "{:?} vs {fwd}", r.estimate);
    }
}
