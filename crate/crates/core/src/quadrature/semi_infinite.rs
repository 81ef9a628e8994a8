use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::{CompensatedSum, QuadResult, QuadratureConfig};
use crate::{Error, Result};

/// Half-width of the scanned range in ln v'.
const MAX_SPAN: f64 = 60.0;
const MAX_LEVELS: usize = 14;
const MIN_SUPPORT_NODES: usize = 8;

/// Interval in u = ln v' outside which `mag(u)` stays below `tol × peak`.
///
/// Walks outward from `u0` in both directions until three consecutive
/// nodes fall below the cutoff, then narrows the step and repeats around the
/// peak if the support spans too few nodes to trust.
fn find_window(
    mut mag: impl FnMut(f64) -> Result<f64>,
    u0: f64,
    mut step: f64,
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    let mut center = u0;
    for _ in 0..6 {
        let mut samples: Vec<(f64, f64)> = Vec::new();
        let mut peak = mag(center)?;
        samples.push((center, peak));
        let max_walk = (MAX_SPAN / step) as usize;
        for dir in [-1.0, 1.0] {
            let mut below = 0;
            for k in 1..=max_walk {
                let u = center + dir * k as f64 * step;
                let m = mag(u)?;
                peak = peak.max(m);
                samples.push((u, m));
                if peak > 0.0 && m <= tol * peak {
                    below += 1;
                    if below >= 3 {
                        break;
                    }
                } else {
                    below = 0;
                }
            }
        }
        if !(peak > 0.0) {
            // nothing seen: either zero or narrower than the step
            step /= 4.0;
            continue;
        }
        let cut = tol * peak;
        let (mut lo, mut hi, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0);
        let mut arg_peak = center;
        for &(u, m) in &samples {
            if m > cut {
                lo = lo.min(u);
                hi = hi.max(u);
                count += 1;
            }
            if m == peak {
                arg_peak = u;
            }
        }
        if count >= MIN_SUPPORT_NODES {
            return Ok(Some((lo - step, hi + step)));
        }
        center = arg_peak;
        step /= 8.0;
    }
    Ok(None)
}

/// ∫_0^∞ f(v') dv' with v' = e^u and a doubling trapezoid rule in u.
pub fn integrate_semi_infinite(f: impl FnMut(f64) -> Result<Complex64>, cfg: &QuadratureConfig) -> Result<QuadResult> {
    integrate_semi_infinite_around(f, 1.0, 1.0, cfg)
}

/// As [`integrate_semi_infinite`], starting the support search at `v_hint`
/// with a scan step of a quarter of `log_width` (the expected spread of ln v').
pub fn integrate_semi_infinite_around(
    mut f: impl FnMut(f64) -> Result<Complex64>,
    v_hint: f64,
    log_width: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let mut g = |u: f64| -> Result<Complex64> {
        let v = u.exp();
        f(v).map(|y| y * v).map_err(|e| e.at_node(v))
    };
    let Some((lo, hi)) = find_window(|u| g(u).map(|y| y.norm()), v_hint.ln(), 0.25 * log_width, cfg.v_upper_mass_tol)?
    else {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), err_estimate: 0.0 });
    };

    let mut n = 16usize;
    let mut h = (hi - lo) / n as f64;
    let mut sum: CompensatedSum = CompensatedSum::new();
    sum.add((g(lo)? + g(hi)?) * 0.5);
    for k in 1..n {
        sum.add(g(lo + k as f64 * h)?);
    }
    let mut estimate = sum.total() * h;
    let mut err = f64::INFINITY;
    for level in 0..MAX_LEVELS {
        for k in 0..n {
            sum.add(g(lo + (k as f64 + 0.5) * h)?);
        }
        n *= 2;
        h *= 0.5;
        let refined = sum.total() * h;
        err = (refined - estimate).norm();
        estimate = refined;
        if level >= 1 && err <= (cfg.rel_tol * estimate.norm()).max(cfg.abs_tol) {
            return Ok(QuadResult { value: estimate, err_estimate: err });
        }
    }
    Err(Error::Quadrature { value: estimate, achieved: err })
}

/// Fixed trapezoid grid in ln v' for integrals that are evaluated many times
/// against different integrands with the same support.
///
/// The node count is odd so that every other node forms a nested grid of
/// twice the step; the difference between the two rules is the reported
/// error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    coarse: Vec<f64>,
}

impl LogGrid {
    /// `n` nodes (rounded up to odd) spanning `[lo_u, hi_u]` in ln v'.
    pub fn new(lo_u: f64, hi_u: f64, n: usize) -> Self {
        let n = n.max(3) | 1;
        let h = (hi_u - lo_u) / (n - 1) as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut coarse = Vec::with_capacity(n);
        for k in 0..n {
            let v = (lo_u + k as f64 * h).exp();
            let end = k == 0 || k == n - 1;
            nodes.push(v);
            weights.push(h * v * if end { 0.5 } else { 1.0 });
            coarse.push(if k % 2 == 1 { 0.0 } else { 2.0 * h * v * if end { 0.5 } else { 1.0 } });
        }
        Self { nodes, weights, coarse }
    }

    /// Grid covering the region where `envelope(v')` exceeds `tol` times its
    /// peak. The search starts at `v_hint` with a step of `log_width / 4`.
    pub fn from_envelope(
        mut envelope: impl FnMut(f64) -> Result<f64>,
        v_hint: f64,
        log_width: f64,
        n: usize,
        tol: f64,
    ) -> Result<Self> {
        let window = find_window(
            |u| {
                let v = u.exp();
                envelope(v).map(|m| m * v).map_err(|e| e.at_node(v))
            },
            v_hint.ln(),
            0.25 * log_width,
            tol,
        )?;
        let (lo, hi) = window.unwrap_or((v_hint.ln() - 1.0, v_hint.ln() + 1.0));
        Ok(Self::new(lo, hi, n))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of the nested grid of twice the step (zero on odd nodes).
    pub fn coarse_weights(&self) -> &[f64] {
        &self.coarse
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trapezoid sum of integrand values at the nodes.
    pub fn integrate(&self, values: &[Complex64]) -> QuadResult {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut fine = CompensatedSum::new();
        let mut coarse = CompensatedSum::new();
        for ((y, w), c) in values.iter().zip(&self.weights).zip(&self.coarse) {
            fine.add(*y * *w);
            coarse.add(*y * *c);
        }
        let value = fine.total();
        QuadResult { value, err_estimate: (value - coarse.total()).norm() }
    }
}
