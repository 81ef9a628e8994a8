//! Monte Carlo oracle for the analytic pricers.
//!
//! Variance moves by exact transitions of `U = 1/V`, which is a CIR process
//! with noncentral chi-square transitions. The log-price is rebuilt from the
//! variance path: the `W¹` part is a function of `ln V` increments and `∫V`,
//! and the `W²` part is conditionally normal on each fine step.
//!
//! Every path draws from its own ChaCha8 stream selected by the path index,
//! so results do not depend on the number of worker threads.

mod paths;
mod price;
mod sampler;

pub use paths::{simulate_paths, PathSample, PathSimulator};
pub use price::{mc_expectations, mc_price, McEstimate, McReport, Product};
pub use sampler::{sample_variance_transition, VarianceSampler};

use three_halves_core::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "THREE_HALVES_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExactVarianceTransition,
    EulerFullTruncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { n_paths: 100_000, steps_per_year: 512, seed: 1, scheme: Scheme::ExactVarianceTransition }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
        }
        if self.steps_per_year < 12 {
            return Err(Error::InvalidArgument(format!(
                "steps_per_year must be at least 12, got {}",
                self.steps_per_year
            )));
        }
        Ok(())
    }
}

/// Worker count: available parallelism, capped by `THREE_HALVES_THREADS`.
pub fn worker_threads() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => available.min(cap),
        _ => available,
    }
}

/// `f(0..n)` evaluated on contiguous chunks in parallel, returned in index order.
pub(crate) fn parallel_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let threads = worker_threads().min(n.max(1));
    if threads <= 1 {
        return (0..n).map(&f).collect();
    }
    let chunk = n.div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let (lo, hi) = (w * chunk, ((w + 1) * chunk).min(n));
                scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}
