use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use super::{CompensatedSum, QuadratureConfig};
use crate::{Error, Result};

/// Truncation is extended by this factor at most.
const MAX_EXTENSION: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierResult {
    pub value: f64,
    /// Imaginary part of the inversion, which should vanish for a real price.
    pub imag_residual: f64,
    /// Step-halving difference plus the tail estimate.
    pub err_estimate: f64,
    /// Contribution of the last tenth of the truncated range.
    pub tail_estimate: f64,
    pub truncation_warning: bool,
    pub truncation: f64,
    pub nodes: usize,
}

/// `(1/2π) ∫ payoff(ω) cf(ω) dRe ω` along `Im ω = cfg.damping_omega`.
///
/// With `fold` the integrand is assumed Hermitian (`f(-ω̄) = conj f(ω)`)
/// and only `Re ω ≥ 0` is evaluated; the imaginary residual is then the
/// imaginary part at `Re ω = 0`, which is zero for a Hermitian integrand.
/// The truncation starts at `cfg.fourier_truncation` and grows by half
/// until the last tenth of the range contributes less than `abs_tol`.
pub fn fourier_invert_1d(
    mut cf: impl FnMut(Complex64) -> Result<Complex64>,
    mut payoff: impl FnMut(Complex64) -> Result<Complex64>,
    cfg: &QuadratureConfig,
    fold: bool,
) -> Result<FourierResult> {
    let h = cfg.omega_step();
    let d = cfg.damping_omega;
    let mut f = |k: i64| -> Result<Complex64> {
        let w = Complex64::new(k as f64 * h, d);
        let p = payoff(w)?;
        if p == Complex64::new(0.0, 0.0) {
            return Ok(p);
        }
        Ok(p * cf(w).map_err(|e| e.at_node(w.re))?)
    };

    let mut kmax = (cfg.fourier_truncation / h).round() as i64;
    let kcap = (kmax as f64 * MAX_EXTENSION) as i64;
    let mut pos: Vec<Complex64> = Vec::new();
    let mut neg: Vec<Complex64> = Vec::new();
    pos.push(f(0)?);
    let (tail, warning) = loop {
        for k in pos.len() as i64..=kmax {
            pos.push(f(k)?);
            if !fold {
                neg.push(f(-k)?);
            }
        }
        let from = (0.9 * kmax as f64) as usize;
        let mut tail: f64 = pos[from..].iter().map(|y| y.norm()).sum::<f64>();
        if !fold {
            tail += neg[from.saturating_sub(1)..].iter().map(|y| y.norm()).sum::<f64>();
        } else {
            tail *= 2.0;
        }
        tail *= h / (2.0 * PI);
        if tail <= cfg.abs_tol {
            break (tail, false);
        }
        if kmax >= kcap {
            break (tail, true);
        }
        kmax = (kmax + kmax / 2).min(kcap);
    };

    let combine = |stride: usize| -> Complex64 {
        let mut s = CompensatedSum::new();
        s.add(pos[0] * 0.5);
        for y in pos.iter().step_by(stride).skip(1) {
            s.add(*y);
        }
        let mut total = s.total();
        if fold {
            total = Complex64::new(2.0 * total.re, 2.0 * pos[0].im * 0.5);
        } else {
            let mut sn = CompensatedSum::new();
            sn.add(pos[0] * 0.5);
            for y in neg.iter().skip(stride - 1).step_by(stride) {
                sn.add(*y);
            }
            total += sn.total();
        }
        total * (stride as f64 * h / (2.0 * PI))
    };
    let fine = combine(1);
    let coarse = combine(2);
    Ok(FourierResult {
        value: fine.re,
        imag_residual: fine.im,
        err_estimate: (fine.re - coarse.re).abs() + tail,
        tail_estimate: tail,
        truncation_warning: warning,
        truncation: kmax as f64 * h,
        nodes: if fold { pos.len() } else { pos.len() + neg.len() },
    })
}

/// Euler-averaged sum of `terms`: partial sums `s_n .. s_{n+m}` binomially
/// averaged, with `n = terms.len() - order`. Returns the sum and the change
/// from dropping one plain term, as an error estimate.
pub fn euler_sum(terms: &[Complex64], order: usize) -> (Complex64, f64) {
    assert!(terms.len() > order + 1, "need more terms than the averaging order");
    let mut partial = Vec::with_capacity(terms.len());
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(*t);
        partial.push(acc.total());
    }
    let average = |last: usize| -> Complex64 {
        // partial[last - order ..= last]
        let mut s = Complex64::new(0.0, 0.0);
        let mut binom = 1.0;
        for j in 0..=order {
            s += partial[last - order + j] * binom;
            binom = binom * (order - j) as f64 / (j + 1) as f64;
        }
        s / 2f64.powi(order as i32)
    };
    let n = terms.len() - 1;
    let a = average(n);
    let b = average(n - 1);
    (a, (a - b).norm())
}

/// Re ω axis of the double integral: folded trapezoid with adaptive truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaAxis {
    pub damping: f64,
    pub step: f64,
    pub truncation: f64,
    /// Relative tolerance for the last-tenth tail test; absolute floor `abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Re η axis of the double integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaAxis {
    /// Plain truncated trapezoid.
    Trapezoid { damping: f64, step: f64, half_width: f64 },
    /// Trapezoid with step `π/B` and damping `A/(2B)` whose two tails are
    /// summed with Euler averaging; the classic Fourier-series inversion of a
    /// distribution function at `B`.
    FourierSeries { damping: f64, step: f64, terms: usize, order: usize },
}

impl EtaAxis {
    pub fn timer(cfg: &QuadratureConfig, budget: f64) -> Self {
        match cfg.eta_axis {
            super::EtaAxisKind::Trapezoid => {
                let step = cfg.omega_step();
                EtaAxis::Trapezoid { damping: cfg.damping_eta, step, half_width: cfg.fourier_truncation }
            }
            super::EtaAxisKind::FourierSeries => EtaAxis::FourierSeries {
                damping: cfg.series_aliasing / (2.0 * budget),
                step: PI / budget,
                terms: cfg.series_terms,
                order: cfg.series_order,
            },
        }
    }

    /// Nodes, symmetric about the imaginary axis: `η_{-k} = -conj(η_k)`.
    pub fn nodes(&self) -> Vec<Complex64> {
        let (damping, step, m) = match *self {
            EtaAxis::Trapezoid { damping, step, half_width } => (damping, step, (half_width / step).round() as i64),
            EtaAxis::FourierSeries { damping, step, terms, order } => (damping, step, (terms + order) as i64),
        };
        (-m..=m).map(|k| Complex64::new(k as f64 * step, damping)).collect()
    }

    /// `(1/2π) ∫ f dRe η` from values at [`nodes`](Self::nodes), with an error estimate.
    pub fn combine(&self, values: &[Complex64]) -> (Complex64, f64) {
        let m = values.len() / 2;
        match *self {
            EtaAxis::Trapezoid { step, .. } => {
                let fine: CompensatedSum = values.iter().copied().collect();
                let coarse: CompensatedSum = values.iter().skip(m % 2).step_by(2).copied().collect();
                let scale = step / (2.0 * PI);
                let fine = fine.total() * scale;
                (fine, (fine - coarse.total() * 2.0 * scale).norm())
            }
            EtaAxis::FourierSeries { step, order, .. } => {
                let right = &values[m + 1..];
                let left: Vec<Complex64> = values[..m].iter().rev().copied().collect();
                let (r, er) = euler_sum(right, order);
                let (l, el) = euler_sum(&left, order);
                let scale = step / (2.0 * PI);
                ((values[m] + r + l) * scale, (er + el) * scale)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalResult {
    pub value: f64,
    pub imag_residual: f64,
    pub err_estimate: f64,
    /// Step-halving difference on the ω axis.
    pub omega_err: f64,
    /// Accumulated η-axis error estimates.
    pub eta_err: f64,
    pub omega_tail: f64,
    pub truncation_warning: bool,
    pub omega_truncation: f64,
    pub omega_nodes: usize,
    pub eta_nodes: usize,
}

/// `(1/4π²) ∬ f(ω, η) dRe ω dRe η` for an integrand that is Hermitian,
/// `f(-ω̄, -η̄) = conj f(ω, η)`, so only `Re ω ≥ 0` is evaluated.
///
/// `row(ω, η_nodes)` returns the integrand along one ω row.
pub fn parseval_double(
    mut row: impl FnMut(Complex64, &[Complex64]) -> Result<Vec<Complex64>>,
    omega: &OmegaAxis,
    eta: &EtaAxis,
) -> Result<ParsevalResult> {
    if !(omega.step > 0.0 && omega.truncation > 0.0) {
        return Err(Error::InvalidArgument("omega axis needs positive step and truncation".into()));
    }
    let eta_nodes = eta.nodes();
    let h = omega.step;
    let mut eval = |k: usize| -> Result<(Complex64, f64)> {
        let w = Complex64::new(k as f64 * h, omega.damping);
        let vals = row(w, &eta_nodes).map_err(|e| e.at_node(w.re))?;
        if vals.len() != eta_nodes.len() {
            return Err(Error::InvalidArgument("row returned wrong number of values".into()));
        }
        Ok(eta.combine(&vals))
    };

    let mut kmax = (omega.truncation / h).round() as usize;
    let kcap = (kmax as f64 * MAX_EXTENSION) as usize;
    let mut rows: Vec<(Complex64, f64)> = Vec::new();
    let (tail, warning) = loop {
        for k in rows.len()..=kmax {
            rows.push(eval(k)?);
        }
        let running: f64 = rows.iter().map(|r| r.0.re).sum::<f64>() * h / PI;
        let from = (0.9 * kmax as f64) as usize;
        let tail = rows[from..].iter().map(|r| r.0.norm()).sum::<f64>() * h / PI;
        if tail <= (omega.rel_tol * running.abs()).max(omega.abs_tol) {
            break (tail, false);
        }
        if kmax >= kcap {
            break (tail, true);
        }
        kmax = (kmax + kmax / 2).min(kcap);
    };

    let folded = |stride: usize| -> f64 {
        let mut s = CompensatedSum::new();
        for r in rows.iter().step_by(stride).skip(1) {
            s.add(r.0);
        }
        (rows[0].0.re + 2.0 * s.total().re) * stride as f64 * h / (2.0 * PI)
    };
    let fine = folded(1);
    let omega_err = (fine - folded(2)).abs();
    let eta_err = (rows[0].1 + 2.0 * rows[1..].iter().map(|r| r.1).sum::<f64>()) * h / (2.0 * PI);
    Ok(ParsevalResult {
        value: fine,
        imag_residual: rows[0].0.im * h / (2.0 * PI),
        err_estimate: omega_err + eta_err + tail,
        omega_err,
        eta_err,
        omega_tail: tail,
        truncation_warning: warning,
        omega_truncation: kmax as f64 * h,
        omega_nodes: rows.len(),
        eta_nodes: eta_nodes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm_cdf(x: f64) -> f64 {
        0.5 * libm::erfc(-x / 2f64.sqrt())
    }

    /// Call payoff transform ∫ e^{-iωx}(e^x - K)^+ dx for Im ω < -1.
    fn call_transform(k: f64) -> impl Fn(Complex64) -> Result<Complex64> {
        move |w: Complex64| {
            let i = Complex64::i();
            Ok(-(((1.0 - i * w) * k.ln()).exp()) / (w * w + i * w))
        }
    }

    #[test]
    fn black_scholes_call() {
        let (s0, k, r, sigma, t) = (100.0f64, 95.0, 0.02, 0.25, 0.75);
        let i = Complex64::i();
        let x0 = s0.ln();
        let cf = move |w: Complex64| {
            Ok((i * w * (x0 + (r - 0.5 * sigma * sigma) * t) - w * w * (0.5 * sigma * sigma * t)).exp())
        };
        let cfg = QuadratureConfig::default();
        let res = fourier_invert_1d(cf, call_transform(k), &cfg, true).unwrap();
        let price = (-r * t).exp() * res.value;
        let d1 = ((s0 / k).ln() + (r + 0.5 * sigma * sigma) * t) / (sigma * t.sqrt());
        let d2 = d1 - sigma * t.sqrt();
        let bs = s0 * norm_cdf(d1) - k * (-r * t).exp() * norm_cdf(d2);
        assert!((price - bs).abs() < 1e-6, "{price} vs {bs}");
        assert!(!res.truncation_warning);
    }

    #[test]
    fn folding_matches_full_contour() {
        let i = Complex64::i();
        let cf = |w: Complex64| Ok((i * w * 4.6 - w * w * 0.02 + i * w * w * w * 0.001).exp());
        let cfg = QuadratureConfig::default();
        let a = fourier_invert_1d(cf, call_transform(100.0), &cfg, true).unwrap();
        let b = fourier_invert_1d(cf, call_transform(100.0), &cfg, false).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12 * b.value.abs(), "{} {}", a.value, b.value);
        assert!(b.imag_residual.abs() <= 1e-12 * b.value.abs());
    }

    #[test]
    fn zero_payoff() {
        let cfg = QuadratureConfig::default();
        let r =
            fourier_invert_1d(|_| Ok(Complex64::new(1.0, 0.0)), |_| Ok(Complex64::new(0.0, 0.0)), &cfg, true).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn slow_decay_raises_warning() {
        let cfg = QuadratureConfig { fourier_truncation: 10.0, fourier_nodes: 64, ..Default::default() };
        let r = fourier_invert_1d(|w| Ok(w.inv()), |_| Ok(Complex64::new(1.0, 0.0)), &cfg, true).unwrap();
        assert!(r.truncation_warning && r.tail_estimate > 0.0);
    }

    #[test]
    fn euler_sum_alternating_series() {
        // Σ_{k≥1} (-1)^{k+1}/k = ln 2
        let terms: Vec<Complex64> =
            (1..=30).map(|k| Complex64::new(if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64, 0.0)).collect();
        let (s, err) = euler_sum(&terms, 12);
        assert!((s.re - 2f64.ln()).abs() < 1e-10, "{s}");
        assert!(err < 1e-8);
    }

    /// P(I < B) for I ~ Exp(λ) from its characteristic function.
    #[test]
    fn fourier_series_axis_recovers_distribution_function() {
        let cfg = QuadratureConfig::default();
        let i = Complex64::i();
        for (lambda, b) in [(10.0, 0.05), (10.0, 0.2), (3.0, 0.1)] {
            let axis = EtaAxis::timer(&cfg, b);
            let vals: Vec<Complex64> =
                axis.nodes().iter().map(|&e| (-i * e * b).exp() / (-i * e) * (lambda / (lambda - i * e))).collect();
            let (p, err) = axis.combine(&vals);
            let want = 1.0 - (-lambda * b).exp();
            assert!((p.re - want).abs() < 1e-7, "λ={lambda} B={b}: {} vs {want}", p.re);
            assert!(p.im.abs() < 1e-12);
            assert!(err < 1e-6);
        }
    }

    #[test]
    fn separable_double_integral() {
        // (1/2π)∫ e^{-ω²a/2 + iωx} = N(x; 0, a) along any horizontal contour
        let (a, b, x, y) = (0.7, 1.9, 0.3, -0.4);
        let i = Complex64::i();
        let f =
            move |w: Complex64, e: Complex64| (-w * w * (a / 2.0) + i * w * x - e * e * (b / 2.0) + i * e * y).exp();
        let omega = OmegaAxis { damping: -1.5, step: 0.05, truncation: 10.0, rel_tol: 1e-12, abs_tol: 1e-14 };
        let eta = EtaAxis::Trapezoid { damping: 0.5, step: 0.05, half_width: 12.0 };
        let res = parseval_double(|w, es| Ok(es.iter().map(|&e| f(w, e)).collect()), &omega, &eta).unwrap();
        let gauss = |z: f64, s2: f64| (-z * z / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
        let want = gauss(x, a) * gauss(y, b);
        assert!((res.value - want).abs() <= 1e-6 * want, "{} vs {want}", res.value);
        assert!(res.imag_residual.abs() < 1e-12);
    }

    #[test]
    fn zero_double_integral() {
        let omega = OmegaAxis { damping: -1.5, step: 0.1, truncation: 5.0, rel_tol: 1e-9, abs_tol: 1e-12 };
        let eta = EtaAxis::FourierSeries { damping: 92.0, step: 31.4, terms: 20, order: 12 };
        let res = parseval_double(|_, es| Ok(alloc::vec![Complex64::new(0.0, 0.0); es.len()]), &omega, &eta).unwrap();
        assert_eq!(res.value, 0.0);
    }
}
