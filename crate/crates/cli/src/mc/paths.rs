use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use three_halves_core::model::ModelParams;
use three_halves_core::transforms::interval_coefficients;
use three_halves_core::{Error, Result};

use super::sampler::VarianceSampler;
use super::{parallel_map, Scheme, SimulationConfig};

/// One simulated path observed at the schedule points.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    /// Log-price.
    pub x: Vec<f64>,
    /// Quadratic variation: trapezoid `∫V` plus squared jumps.
    pub i: Vec<f64>,
    /// Running sum of squared log-returns between schedule points.
    pub i_discrete: Vec<f64>,
    /// Variance; truncated at zero under the Euler scheme.
    pub v: Vec<f64>,
    /// `(time, log-jump)` pairs, recorded only by `simulate_paths`.
    pub jump_marks: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone)]
struct Step {
    t: f64,
    h: f64,
    growth: f64,
    scale: f64,
    theta_integral: f64,
    theta_left: f64,
    jump_count: Option<Poisson<f64>>,
}

/// Precomputed fine grid and coefficients for a schedule.
#[derive(Debug, Clone)]
pub struct PathSimulator {
    params: ModelParams,
    scheme: Scheme,
    schedule: Vec<f64>,
    steps: Vec<Step>,
    /// Number of fine steps in each schedule interval.
    per_interval: Vec<usize>,
    sampler: VarianceSampler,
    seed: u64,
}

impl PathSimulator {
    /// `schedule` starts at 0, is strictly increasing and ends at the horizon.
    pub fn new(schedule: &[f64], params: &ModelParams, sim: &SimulationConfig) -> Result<Self> {
        sim.validate()?;
        params.ensure_valid()?;
        let ok = schedule.len() >= 2 && schedule[0] == 0.0 && schedule.windows(2).all(|w| w[1] > w[0]);
        if !ok || schedule.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("schedule must start at 0 and be strictly increasing".into()));
        }
        let jump_rate = params.jumps.map(|j| j.lambda).unwrap_or(0.0);
        let mut steps = Vec::new();
        let mut per_interval = Vec::with_capacity(schedule.len() - 1);
        for w in schedule.windows(2) {
            let n = ((w[1] - w[0]) * sim.steps_per_year as f64).ceil().max(1.0) as usize;
            per_interval.push(n);
            for k in 0..n {
                let t = w[0] + (w[1] - w[0]) * k as f64 / n as f64;
                let t_next = if k + 1 == n { w[1] } else { w[0] + (w[1] - w[0]) * (k + 1) as f64 / n as f64 };
                let iv = interval_coefficients(params, t, t_next)?;
                let h = t_next - t;
                let jump_count = if jump_rate > 0.0 {
                    Some(Poisson::new(jump_rate * h).map_err(|e| Error::InvalidArgument(e.to_string()))?)
                } else {
                    None
                };
                steps.push(Step {
                    t,
                    h,
                    growth: iv.growth,
                    scale: iv.scale,
                    theta_integral: iv.log_growth,
                    theta_left: params.theta.value_at(t),
                    jump_count,
                });
            }
        }
        Ok(Self {
            params: params.clone(),
            scheme: sim.scheme,
            schedule: schedule.to_vec(),
            steps,
            per_interval,
            sampler: VarianceSampler::new(params)?,
            seed: sim.seed,
        })
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn fine_steps(&self) -> usize {
        self.steps.len()
    }

    /// Path `index` of the ensemble; independent of any other path.
    pub fn simulate(&self, index: u64, record_jumps: bool) -> PathSample {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let p = &self.params;
        let n = self.schedule.len();
        let mut out = PathSample {
            times: self.schedule.clone(),
            x: Vec::with_capacity(n),
            i: Vec::with_capacity(n),
            i_discrete: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            jump_marks: record_jumps.then(Vec::new),
        };
        let (mut x, mut qv, mut rv, mut v) = (p.s0.ln(), 0.0, 0.0, p.v0);
        out.x.push(x);
        out.i.push(qv);
        out.i_discrete.push(rv);
        out.v.push(v);

        let rho_bar = (1.0 - p.rho * p.rho).sqrt();
        let log_coef = p.rho / p.epsilon;
        let iv_coef = p.rho * p.epsilon * (p.kappa_over_eps2() + 0.5) - 0.5;
        let compensator = p.jumps.map(|j| j.lambda * j.mean_relative_jump()).unwrap_or(0.0);
        let drift = p.r - p.q - compensator;

        let mut step_iter = self.steps.iter();
        for &count in &self.per_interval {
            let x_start = x;
            for step in step_iter.by_ref().take(count) {
                match self.scheme {
                    Scheme::ExactVarianceTransition => {
                        let u_next = self.sampler.sample_u(1.0 / v, step.growth, step.scale, &mut rng);
                        let v_next = 1.0 / u_next;
                        let int_v = 0.5 * (v + v_next) * step.h;
                        let z: f64 = rng.sample(StandardNormal);
                        x += drift * step.h
                            + log_coef * (v_next.ln() - v.ln() - step.theta_integral)
                            + iv_coef * int_v
                            + rho_bar * int_v.sqrt() * z;
                        qv += int_v;
                        v = v_next;
                    }
                    Scheme::EulerFullTruncation => {
                        let z1: f64 = rng.sample(StandardNormal);
                        let z2: f64 = rng.sample(StandardNormal);
                        let vp = v.max(0.0);
                        let sq = (vp * step.h).sqrt();
                        x += (drift - 0.5 * vp) * step.h + sq * (p.rho * z1 + rho_bar * z2);
                        qv += vp * step.h;
                        v += vp * (step.theta_left - p.kappa * vp) * step.h + p.epsilon * vp * sq * z1;
                    }
                }
                if let (Some(count), Some(j)) = (&step.jump_count, &p.jumps) {
                    let k = count.sample(&mut rng) as usize;
                    for _ in 0..k {
                        let z: f64 = rng.sample(StandardNormal);
                        let size = j.mu + j.sigma * z;
                        x += size;
                        qv += size * size;
                        if let Some(marks) = out.jump_marks.as_mut() {
                            let at: f64 = rng.random();
                            marks.push((step.t + at * step.h, size));
                        }
                    }
                }
            }
            let ret = x - x_start;
            rv += ret * ret;
            out.x.push(x);
            out.i.push(qv);
            out.i_discrete.push(rv);
            out.v.push(v.max(0.0));
        }
        out
    }
}

/// Full ensemble of `sim.n_paths` paths observed at `schedule`, with jump
/// marks recorded.
pub fn simulate_paths(schedule: &[f64], params: &ModelParams, sim: &SimulationConfig) -> Result<Vec<PathSample>> {
    let simulator = PathSimulator::new(schedule, params, sim)?;
    Ok(parallel_map(sim.n_paths, |k| simulator.simulate(k as u64, true)))
}
