//! Discretely sampled weighted moment swaps.
//!
//! The fair strike is `(1/T) Σ_k L_k` with
//! `L_k = E[f(S_{t_{i_k}}) (X_{t_k} - X_{t_{k-1}})^m]`. Each `L_k` is an
//! m-th φ-derivative at 0 of
//!
//! ```text
//! E(ω, φ) = E[e^{iω X_{t_i} + iφ (X_{t_k} - X_{t_{k-1}})}] / e^{iω x₀}
//! ```
//!
//! integrated against the weight transform in ω. Price-ratio weights put a
//! Dirac mass at `ω = -i`, so no ω integral is needed; corridor weights are
//! inverted along `Im ω = -1/2`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::derivative::{i_pow_neg, Stencil};
use super::{check_real, IMAG_TOLERANCE};
use crate::model::ModelParams;
use crate::quadrature::{fourier_invert_1d, CompensatedSum, LogGrid, QuadratureConfig};
use crate::transforms::{interval_coefficients, log_spread, JointCf, PartialTransform, TransformPoint};
use crate::{Error, Result};

/// Contour of the corridor weight transform.
pub const CORRIDOR_DAMPING: f64 = -0.5;

/// Sampling index of the weight relative to the return period k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lag {
    /// `i_k = k`
    Current,
    /// `i_k = k - 1`
    Previous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// f ≡ 1.
    Constant,
    /// f(x) = x / S₀ sampled per `Lag`.
    PriceRatio(Lag),
    /// f(x) = 1{lower < x ≤ upper} sampled per `Lag`.
    Corridor { lower: f64, upper: f64, lag: Lag },
    /// f(x) = x / S₀ sampled at maturity.
    TerminalPrice,
}

impl WeightKind {
    /// `i_k` for return period `k` of `n`.
    pub fn index(&self, k: usize, n: usize) -> usize {
        let lagged = |lag: &Lag| match lag {
            Lag::Current => k,
            Lag::Previous => k - 1,
        };
        match self {
            WeightKind::Constant => 0,
            WeightKind::PriceRatio(lag) | WeightKind::Corridor { lag, .. } => lagged(lag),
            WeightKind::TerminalPrice => n,
        }
    }

    /// f(s).
    pub fn value(&self, s: f64, s0: f64) -> f64 {
        match *self {
            WeightKind::Constant => 1.0,
            WeightKind::PriceRatio(_) | WeightKind::TerminalPrice => s / s0,
            WeightKind::Corridor { lower, upper, .. } => {
                if lower < s && s <= upper {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSwapSpec {
    /// `0 = t_0 < t_1 < … < t_N = T`.
    pub schedule: Vec<f64>,
    pub moment: u32,
    pub weight: WeightKind,
}

impl MomentSwapSpec {
    /// `n` equal periods over `[0, maturity]`.
    pub fn uniform(maturity: f64, n: usize, moment: u32, weight: WeightKind) -> Self {
        let schedule = (0..=n).map(|j| if j == n { maturity } else { maturity * j as f64 / n as f64 }).collect();
        Self { schedule, moment, weight }
    }

    pub fn maturity(&self) -> f64 {
        *self.schedule.last().unwrap_or(&0.0)
    }

    pub fn periods(&self) -> usize {
        self.schedule.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidArgument(m));
        if !(self.moment == 2 || self.moment == 3) {
            return bad(alloc::format!("moment order must be 2 or 3, got {}", self.moment));
        }
        validate_schedule(&self.schedule)?;
        if let WeightKind::Corridor { lower, upper, .. } = self.weight {
            if !(lower > 0.0 && lower < upper && upper.is_finite()) {
                return bad(alloc::format!("corridor needs 0 < lower < upper < ∞, got ({lower}, {upper})"));
            }
        }
        Ok(())
    }
}

fn validate_schedule(schedule: &[f64]) -> Result<()> {
    let ok = schedule.len() >= 2
        && schedule[0] == 0.0
        && schedule.windows(2).all(|w| w[1] > w[0])
        && schedule.iter().all(|t| t.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument("schedule must start at 0 and be strictly increasing".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrikeResult {
    pub strike: f64,
    pub err_estimate: f64,
    /// `L_k` for `k = 1..=N`.
    pub legs: Vec<f64>,
}

/// Trapezoid grid in v' for transitions from `(t_a, v)` to `t_b`, sized by
/// the real transform at `Im ω`, which dominates the modulus along the
/// whole contour.
fn transition_grid(
    t_a: f64,
    v: f64,
    t_b: f64,
    omega_im: f64,
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<LogGrid> {
    let iv = interval_coefficients(params, t_a, t_b)?;
    let env = PartialTransform::new(TransformPoint::omega_only(Complex64::new(0.0, omega_im)), params)?;
    LogGrid::from_envelope(
        |vp| env.eval(&iv, v, vp).map(|g| g.norm()),
        v,
        log_spread(params, v, t_b - t_a),
        cfg.v_nodes,
        cfg.v_upper_mass_tol,
    )
}

/// Discretized `g1(t_a, v; t_b, ω, ·)` as `(v', fine weight, coarse weight)`;
/// a single unit mass at `v` when `t_a == t_b`.
fn transition_measure(
    t_a: f64,
    v: f64,
    t_b: f64,
    omega: Complex64,
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, Complex64, Complex64)>> {
    let one = Complex64::new(1.0, 0.0);
    if t_a == t_b {
        return Ok(vec![(v, one, one)]);
    }
    let grid = transition_grid(t_a, v, t_b, omega.im, params, cfg)?;
    let iv = interval_coefficients(params, t_a, t_b)?;
    let g = PartialTransform::new(TransformPoint::omega_only(omega), params)?;
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .zip(grid.coarse_weights())
        .map(|((&vp, &w), &c)| {
            let gv = g.eval(&iv, v, vp)?;
            Ok((vp, gv * w, gv * c))
        })
        .collect()
}

/// E(ω, φ) at each φ, on the fine outer grid and on its nested coarse grid.
struct Sampled {
    fine: Vec<Complex64>,
    coarse: Vec<Complex64>,
}

impl Sampled {
    fn new(n: usize) -> Self {
        Self { fine: vec![Complex64::new(0.0, 0.0); n], coarse: vec![Complex64::new(0.0, 0.0); n] }
    }

    fn add(&mut self, idx: usize, wf: Complex64, wc: Complex64, value: Complex64) {
        self.fine[idx] += wf * value;
        self.coarse[idx] += wc * value;
    }
}

/// `collapse` selects the single-integral forms for `i = k` and `i = k - 1`;
/// without it `i = k` uses the general double integral and `i = k - 1` is
/// rejected (its transition density is a Dirac mass).
#[allow(clippy::too_many_arguments)]
fn sample_expectation(
    schedule: &[f64],
    i: usize,
    k: usize,
    omega: Complex64,
    phis: &[f64],
    params: &ModelParams,
    cfg: &QuadratureConfig,
    collapse: bool,
) -> Result<Sampled> {
    let n = schedule.len() - 1;
    if !(1..=n).contains(&k) || i > n {
        return Err(Error::InvalidArgument(alloc::format!("indices out of range: i = {i}, k = {k}, N = {n}")));
    }
    let (tp, tk, ti) = (schedule[k - 1], schedule[k], schedule[i]);
    let v0 = params.v0;
    let step = interval_coefficients(params, tp, tk)?;
    let mut out = Sampled::new(phis.len());

    if i >= k {
        let outer = transition_measure(0.0, v0, tp, omega, params, cfg)?;
        if i == k && collapse {
            let hs = phis
                .iter()
                .map(|&p| JointCf::new(TransformPoint::omega_only(omega + p), params))
                .collect::<Result<Vec<_>>>()?;
            for &(v, wf, wc) in &outer {
                for (idx, h) in hs.iter().enumerate() {
                    out.add(idx, wf, wc, h.eval(&step, v)?);
                }
            }
        } else {
            let gs = phis
                .iter()
                .map(|&p| PartialTransform::new(TransformPoint::omega_only(omega + p), params))
                .collect::<Result<Vec<_>>>()?;
            let tail = interval_coefficients(params, tk, ti)?;
            let h_tail = JointCf::new(TransformPoint::omega_only(omega), params)?;
            for &(v, wf, wc) in &outer {
                let grid = transition_grid(tp, v, tk, omega.im, params, cfg)?;
                let mut inner = vec![CompensatedSum::new(); phis.len()];
                for (&vp, &w) in grid.nodes().iter().zip(grid.weights()) {
                    let ht = h_tail.eval(&tail, vp)? * w;
                    for (acc, g) in inner.iter_mut().zip(&gs) {
                        acc.add(g.eval(&step, v, vp)? * ht);
                    }
                }
                for (idx, acc) in inner.iter().enumerate() {
                    out.add(idx, wf, wc, acc.total());
                }
            }
        }
    } else {
        let outer = transition_measure(0.0, v0, ti, omega, params, cfg)?;
        let hs = phis
            .iter()
            .map(|&p| JointCf::new(TransformPoint::omega_only(Complex64::new(p, 0.0)), params))
            .collect::<Result<Vec<_>>>()?;
        if i + 1 == k {
            if !collapse {
                return Err(Error::InvalidArgument("i = k - 1 has no double-integral form".into()));
            }
            for &(v, wf, wc) in &outer {
                for (idx, h) in hs.iter().enumerate() {
                    out.add(idx, wf, wc, h.eval(&step, v)?);
                }
            }
        } else {
            let zero = Complex64::new(0.0, 0.0);
            for &(v, wf, wc) in &outer {
                let density = transition_measure(ti, v, tp, zero, params, cfg)?;
                let mut inner = vec![CompensatedSum::new(); phis.len()];
                for &(vp, w, _) in &density {
                    for (acc, h) in inner.iter_mut().zip(&hs) {
                        acc.add(h.eval(&step, vp)? * w);
                    }
                }
                for (idx, acc) in inner.iter().enumerate() {
                    out.add(idx, wf, wc, acc.total());
                }
            }
        }
    }
    Ok(out)
}

/// `E[e^{iω X_{t_i} + iφ (X_{t_k} - X_{t_{k-1}})}] / e^{iω x₀}` at each φ,
/// using the collapsed single integrals where they apply.
pub fn moment_expectation(
    schedule: &[f64],
    i: usize,
    k: usize,
    omega: Complex64,
    phis: &[f64],
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<Vec<Complex64>> {
    validate_schedule(schedule)?;
    sample_expectation(schedule, i, k, omega, phis, params, cfg, true).map(|s| s.fine)
}

/// `i^{-m} ∂^m_φ E(ω, φ)` at φ = 0 with its error estimate (outer-grid
/// nesting plus Richardson disagreement).
fn moment_derivative(
    spec: &MomentSwapSpec,
    i: usize,
    k: usize,
    omega: Complex64,
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64)> {
    let delta = spec.schedule[k] - spec.schedule[k - 1];
    let st = Stencil::for_returns(params.v0, delta, spec.moment);
    let s = sample_expectation(&spec.schedule, i, k, omega, &st.points(), params, cfg, true)?;
    let scale = i_pow_neg(spec.moment);
    let d = st.derivative(spec.moment, &s.fine)?;
    let (r1, r2) = st.estimates(spec.moment, &s.fine);
    let (c1, _) = st.estimates(spec.moment, &s.coarse);
    Ok((d * scale, (r1 - c1).norm() + (r1 - r2).norm()))
}

fn leg(spec: &MomentSwapSpec, k: usize, params: &ModelParams, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let n = spec.periods();
    let i = spec.weight.index(k, n);
    let delta = spec.schedule[k] - spec.schedule[k - 1];
    let floor = IMAG_TOLERANCE * Stencil::for_returns(params.v0, delta, spec.moment).floor;
    let (value, err) = if i == 0 {
        let w = spec.weight.value(params.s0, params.s0);
        let (d, e) = moment_derivative(spec, 0, k, Complex64::new(0.0, 0.0), params, cfg)?;
        (d * w, e * w.abs())
    } else {
        match spec.weight {
            WeightKind::Constant => unreachable!("constant weights sample at index 0"),
            WeightKind::PriceRatio(_) | WeightKind::TerminalPrice => {
                moment_derivative(spec, i, k, Complex64::new(0.0, -1.0), params, cfg)?
            }
            WeightKind::Corridor { lower, upper, .. } => {
                let local = QuadratureConfig { damping_omega: CORRIDOR_DAMPING, ..cfg.clone() };
                let x0 = params.s0.ln();
                let iu = Complex64::i();
                let r = fourier_invert_1d(
                    |w| Ok(moment_derivative(spec, i, k, w, params, cfg)?.0 * (iu * w * x0).exp()),
                    |w| Ok(((-iu * w * upper.ln()).exp() - (-iu * w * lower.ln()).exp()) / (-iu * w)),
                    &local,
                    true,
                )?;
                (Complex64::new(r.value, r.imag_residual), r.err_estimate)
            }
        }
    };
    check_real(value.re, value.im, floor)?;
    Ok((value.re, err))
}

fn assemble(legs: Vec<(f64, f64)>, maturity: f64) -> StrikeResult {
    let total: CompensatedSum = legs.iter().map(|l| Complex64::new(l.0, l.1)).collect();
    let total = total.total();
    StrikeResult {
        strike: total.re / maturity,
        err_estimate: total.im / maturity,
        legs: legs.into_iter().map(|l| l.0).collect(),
    }
}

fn fair_strike_checked(spec: &MomentSwapSpec, params: &ModelParams, cfg: &QuadratureConfig) -> Result<StrikeResult> {
    spec.validate()?;
    params.ensure_valid()?;
    cfg.validate()?;
    let legs = (1..=spec.periods()).map(|k| leg(spec, k, params, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(assemble(legs, spec.maturity()))
}

/// Fair strike for a deterministic weight (variance and skewness swaps).
pub fn fair_strike_deterministic_weight(
    spec: &MomentSwapSpec,
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<StrikeResult> {
    if spec.weight != WeightKind::Constant {
        return Err(Error::InvalidArgument("deterministic-weight pricer needs a constant weight".into()));
    }
    fair_strike_checked(spec, params, cfg)
}

/// Fair strike for any weight kind.
pub fn fair_strike_weighted(
    spec: &MomentSwapSpec,
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<StrikeResult> {
    fair_strike_checked(spec, params, cfg)
}

pub fn fair_strike(spec: &MomentSwapSpec, params: &ModelParams, cfg: &QuadratureConfig) -> Result<StrikeResult> {
    match spec.weight {
        WeightKind::Constant => fair_strike_deterministic_weight(spec, params, cfg),
        _ => fair_strike_weighted(spec, params, cfg),
    }
}

/// Self-quantoed variance swap: the weight `S_T/S₀` reduces the ω integral
/// to `ω = -i`, and the φ-derivative is taken pointwise under the double
/// integral
/// `-∬ h(t_k, v'; T, -i, 0) ∂²_φ g1(t_{k-1}, v; t_k, φ - i, v') g1(0, V₀; t_{k-1}, -i, v) dv' dv`.
pub fn fair_strike_self_quantoed(
    schedule: &[f64],
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<StrikeResult> {
    validate_schedule(schedule)?;
    params.ensure_valid()?;
    cfg.validate()?;
    let n = schedule.len() - 1;
    let maturity = schedule[n];
    let minus_i = Complex64::new(0.0, -1.0);
    let h_tail = JointCf::new(TransformPoint::omega_only(minus_i), params)?;
    let mut legs = Vec::with_capacity(n);
    for k in 1..=n {
        let (tp, tk) = (schedule[k - 1], schedule[k]);
        let st = Stencil::for_returns(params.v0, tk - tp, 2);
        let gs = st
            .points()
            .iter()
            .map(|&p| PartialTransform::new(TransformPoint::omega_only(minus_i + p), params))
            .collect::<Result<Vec<_>>>()?;
        let step = interval_coefficients(params, tp, tk)?;
        let tail = interval_coefficients(params, tk, maturity)?;
        let outer = transition_measure(0.0, params.v0, tp, minus_i, params, cfg)?;
        let (mut fine1, mut fine2, mut coarse1) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        let mut samples = [Complex64::new(0.0, 0.0); 9];
        for &(v, wf, wc) in &outer {
            let grid = transition_grid(tp, v, tk, -1.0, params, cfg)?;
            let (mut in1, mut in2) = (CompensatedSum::new(), CompensatedSum::new());
            for (&vp, &w) in grid.nodes().iter().zip(grid.weights()) {
                for (s, g) in samples.iter_mut().zip(&gs) {
                    *s = g.eval(&step, v, vp)?;
                }
                let (r1, r2) = st.estimates(2, &samples);
                let ht = h_tail.eval(&tail, vp)? * w;
                in1.add(r1 * ht);
                in2.add(r2 * ht);
            }
            fine1.add(in1.total() * wf);
            fine2.add(in2.total() * wf);
            coarse1.add(in1.total() * wc);
        }
        let (r1, r2, c1) = (fine1.total(), fine2.total(), coarse1.total());
        let disagreement = (r1 - r2).norm() / r1.norm().max(st.floor);
        if disagreement > 1e-5 {
            return Err(Error::Derivative { disagreement });
        }
        let value = -r1;
        check_real(value.re, value.im, IMAG_TOLERANCE * st.floor)?;
        legs.push((value.re, (r1 - c1).norm() + (r1 - r2).norm()));
    }
    Ok(assemble(legs, maturity))
}

/// `E[I_t]` from `-i ∂_η h(0, V₀; t, 0, η)` at η = 0.
pub fn expected_quadratic_variation(t: f64, params: &ModelParams) -> Result<f64> {
    let scale = params.v0 * t;
    let st = Stencil::new(0.01 / scale, 1e-3 * scale);
    let iv = interval_coefficients(params, 0.0, t)?;
    let f = st
        .points()
        .iter()
        .map(|&e| JointCf::new(TransformPoint::real(0.0, e), params)?.eval(&iv, params.v0))
        .collect::<Result<Vec<_>>>()?;
    Ok((st.derivative(1, &f)? * i_pow_neg(1)).re)
}
