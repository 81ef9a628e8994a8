//! Model parameters, the admissibility constraint, the time coefficients
//! A and C, and the (possibly jump-adjusted) drift coefficient a.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::Violations;
use crate::{Error, Result};

/// Piecewise-constant mean-reversion level θ_t.
///
/// `values[i]` applies on `[breakpoints[i], breakpoints[i + 1])`; the last
/// breakpoint is the horizon, which is `+inf` for a constant curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCurve {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl ThetaCurve {
    pub fn constant(value: f64) -> Self {
        Self { breakpoints: vec![0.0, f64::INFINITY], values: vec![value] }
    }

    /// `breakpoints` must start at 0 and be strictly increasing, with one
    /// more entry than `values`.
    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidArgument(alloc::format!("theta curve: {msg}")));
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return bad("need one more breakpoint than values");
        }
        if breakpoints[0] != 0.0 {
            return bad("first breakpoint must be 0");
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints.iter().any(|b| b.is_nan()) {
            return bad("breakpoints must be strictly increasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("values must be finite");
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn constant_value(&self) -> Option<f64> {
        (self.values.len() == 1).then(|| self.values[0])
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.breakpoints[1..].partition_point(|&b| b <= t);
        self.values[i.min(self.values.len() - 1)]
    }

    fn check(&self, t: f64, t_prime: f64) -> Result<()> {
        if !(0.0 <= t && t <= t_prime && t_prime <= self.horizon()) {
            return Err(Error::Domain { t, t_prime, horizon: self.horizon() });
        }
        Ok(())
    }

    /// Calls `f(length, theta)` for each constant piece of `[t, t_prime]` in order.
    fn for_each_piece(&self, t: f64, t_prime: f64, mut f: impl FnMut(f64, f64)) {
        let mut i = self.breakpoints[1..].partition_point(|&b| b <= t);
        let mut start = t;
        while start < t_prime && i < self.values.len() {
            let end = self.breakpoints[i + 1].min(t_prime);
            f(end - start, self.values[i]);
            start = end;
            i += 1;
        }
    }

    /// ∫_t^{t'} θ_s ds.
    pub fn integral(&self, t: f64, t_prime: f64) -> Result<f64> {
        self.check(t, t_prime)?;
        let mut acc = 0.0;
        self.for_each_piece(t, t_prime, |len, th| acc += th * len);
        Ok(acc)
    }
}

/// Jump component: Poisson intensity with normal log-jump sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpParams {
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl JumpParams {
    /// Jump compensator ϑ = E[e^J] - 1.
    pub fn mean_relative_jump(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp_m1()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kappa: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub r: f64,
    pub q: f64,
    pub s0: f64,
    pub v0: f64,
    pub theta: ThetaCurve,
    pub jumps: Option<JumpParams>,
}

/// A single failed parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotFinite(&'static str),
    EpsilonNotPositive(f64),
    S0NotPositive(f64),
    V0NotPositive(f64),
    RhoOutOfRange(f64),
    /// κ - ρε < -ε²/2.
    Admissibility {
        lhs: f64,
        rhs: f64,
    },
    JumpIntensityNegative(f64),
    JumpStdNegative(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite(name) => write!(f, "{name} is not finite"),
            Violation::EpsilonNotPositive(e) => write!(f, "epsilon = {e} must be > 0"),
            Violation::S0NotPositive(s) => write!(f, "s0 = {s} must be > 0"),
            Violation::V0NotPositive(v) => write!(f, "v0 = {v} must be > 0"),
            Violation::RhoOutOfRange(r) => write!(f, "rho = {r} must lie in [-1, 1]"),
            Violation::Admissibility { lhs, rhs } => {
                write!(f, "admissibility: kappa - rho*epsilon = {lhs} < -epsilon^2/2 = {rhs}")
            }
            Violation::JumpIntensityNegative(l) => write!(f, "jump lambda = {l} must be >= 0"),
            Violation::JumpStdNegative(s) => write!(f, "jump sigma = {s} must be >= 0"),
        }
    }
}

impl ModelParams {
    /// Parameter set calibrated to S&P 500 options, with S0 = 100.
    pub fn reference_sp500() -> Self {
        Self {
            kappa: 22.84,
            epsilon: 8.56,
            rho: -0.99,
            r: 0.015,
            q: 0.0,
            s0: 100.0,
            v0: 0.060025,
            theta: ThetaCurve::constant(4.979),
            jumps: None,
        }
    }

    pub fn validate(&self) -> core::result::Result<(), Violations> {
        let mut out = Vec::new();
        for (name, v) in [
            ("kappa", self.kappa),
            ("epsilon", self.epsilon),
            ("rho", self.rho),
            ("r", self.r),
            ("q", self.q),
            ("s0", self.s0),
            ("v0", self.v0),
        ] {
            if !v.is_finite() {
                out.push(Violation::NotFinite(name));
            }
        }
        if !(self.epsilon > 0.0) {
            out.push(Violation::EpsilonNotPositive(self.epsilon));
        }
        if !(self.s0 > 0.0) {
            out.push(Violation::S0NotPositive(self.s0));
        }
        if !(self.v0 > 0.0) {
            out.push(Violation::V0NotPositive(self.v0));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            out.push(Violation::RhoOutOfRange(self.rho));
        }
        let lhs = self.kappa - self.rho * self.epsilon;
        let rhs = -0.5 * self.epsilon * self.epsilon;
        if lhs < rhs {
            out.push(Violation::Admissibility { lhs, rhs });
        }
        if let Some(j) = self.jumps {
            if !(j.lambda >= 0.0) {
                out.push(Violation::JumpIntensityNegative(j.lambda));
            }
            if !(j.sigma >= 0.0) {
                out.push(Violation::JumpStdNegative(j.sigma));
            }
            if !j.mu.is_finite() {
                out.push(Violation::NotFinite("jump mu"));
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(Violations(out))
        }
    }

    /// Same as [`validate`](Self::validate) but as a crate error.
    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().map_err(Error::Inadmissible)
    }

    /// κ/ε².
    pub fn kappa_over_eps2(&self) -> f64 {
        self.kappa / (self.epsilon * self.epsilon)
    }
}

/// A = exp(∫_t^{t'} θ_s ds).
pub fn coef_a(theta: &ThetaCurve, t: f64, t_prime: f64) -> Result<f64> {
    Ok(theta.integral(t, t_prime)?.exp())
}

/// C = (ε²/2) ∫_t^{t'} exp(∫_t^s θ) ds, composed exactly across pieces.
pub fn coef_c(theta: &ThetaCurve, epsilon: f64, t: f64, t_prime: f64) -> Result<f64> {
    theta.check(t, t_prime)?;
    let mut acc = 0.0;
    let mut log_growth = 0.0;
    theta.for_each_piece(t, t_prime, |len, th| {
        let piece = if th == 0.0 { len } else { (th * len).exp_m1() / th };
        acc += log_growth.exp() * piece;
        log_growth += th * len;
    });
    Ok(0.5 * epsilon * epsilon * acc)
}

/// Drift coefficient a(ω, η) of the transform exponent e^{a(t'-t)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub value: Complex64,
    /// Set when `1 - 2iησ²` is on or left of the imaginary axis, where a
    /// contour may cross the principal square-root branch cut.
    pub branch_warning: bool,
}

pub fn drift_a(omega: Complex64, eta: Complex64, params: &ModelParams) -> Drift {
    let i = Complex64::i();
    let base = i * omega * (params.r - params.q);
    let Some(j) = params.jumps else {
        return Drift { value: base, branch_warning: false };
    };
    let s2 = j.sigma * j.sigma;
    let radicand = 1.0 - i * eta * (2.0 * s2);
    let expo = (i * 2.0 * j.mu * (omega + eta * j.mu) - omega * omega * s2) / (radicand * 2.0);
    let jump_term = expo.exp() / radicand.sqrt() - 1.0;
    Drift {
        value: base - i * omega * (j.lambda * j.mean_relative_jump()) + jump_term * j.lambda,
        branch_warning: radicand.re <= 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_piece() -> ThetaCurve {
        ThetaCurve::piecewise(vec![0.0, 1.0, 2.0], vec![1.0, 3.0]).unwrap()
    }

    /// Composite Simpson on [a, b] with n (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    /// Simpson split at the breakpoint 1.0; `f(s, left)` evaluates the
    /// one-sided limit so panel endpoints never see the jump.
    fn piecewise_simpson(f: impl Fn(f64, bool) -> f64, a: f64, b: f64) -> f64 {
        let mid = 1.0f64.clamp(a, b);
        simpson(|s| f(s, true), a, mid, 2000) + simpson(|s| f(s, false), mid, b, 2000)
    }

    #[test]
    fn validate_examples() {
        assert!(ModelParams::reference_sp500().validate().is_ok());
        let mut p = ModelParams::reference_sp500();
        (p.kappa, p.rho, p.epsilon) = (0.0, 1.0, 1.0);
        let err = p.validate().unwrap_err();
        assert!(matches!(err.0[..], [Violation::Admissibility { .. }]));
        (p.kappa, p.rho, p.epsilon) = (1.0, 0.0, 2.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn validate_reports_every_violation() {
        let mut p = ModelParams::reference_sp500();
        p.epsilon = -1.0;
        p.v0 = 0.0;
        p.rho = 1.5;
        p.jumps = Some(JumpParams { lambda: -1.0, mu: 0.0, sigma: -0.1 });
        let v = p.validate().unwrap_err().0;
        assert_eq!(v.len(), 5, "{v:?}");
    }

    #[test]
    fn constant_theta_closed_forms() {
        let th = ThetaCurve::constant(2.0);
        assert!((coef_a(&th, 0.0, 0.5).unwrap() - core::f64::consts::E).abs() < 1e-15);
        assert!((coef_c(&th, 1.0, 0.0, 0.5).unwrap() - 0.429_570_457_114_761_1).abs() < 1e-15);
        let zero = ThetaCurve::constant(0.0);
        assert_eq!(coef_a(&zero, 0.3, 1.7).unwrap(), 1.0);
        assert_eq!(coef_c(&zero, 2.0, 0.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn degenerate_interval() {
        let th = two_piece();
        assert_eq!(coef_a(&th, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(coef_c(&th, 3.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn piecewise_against_numeric_integration() {
        let th = two_piece();
        let (t, tp) = (0.5, 1.5);
        let theta = |s: f64, left: bool| th.value_at(if left { s.min(1.0 - 1e-12) } else { s });
        let want_a = piecewise_simpson(theta, t, tp).exp();
        assert!((coef_a(&th, t, tp).unwrap() - want_a).abs() < 1e-12 * want_a);
        assert!((coef_a(&th, t, tp).unwrap() - 2f64.exp()).abs() < 1e-14);

        let eps = 1.7;
        let inner = |s: f64, _| piecewise_simpson(theta, t, s).exp();
        let want_c = 0.5 * eps * eps * piecewise_simpson(inner, t, tp);
        let got = coef_c(&th, eps, t, tp).unwrap();
        assert!((got - want_c).abs() < 1e-10 * want_c, "{got} vs {want_c}");
    }

    #[test]
    fn domain_errors() {
        let th = two_piece();
        assert!(matches!(coef_a(&th, 0.5, 2.5), Err(Error::Domain { .. })));
        assert!(matches!(coef_c(&th, 1.0, 1.0, 0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn drift_without_jumps() {
        let p = ModelParams::reference_sp500();
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(drift_a(z, z, &p).value, z);
        let d = drift_a(Complex64::new(1.0, 0.0), z, &p).value;
        assert_eq!(d, Complex64::new(0.0, 0.015));
    }

    #[test]
    fn zero_intensity_jumps_are_exact() {
        let p = ModelParams::reference_sp500();
        let mut pj = p.clone();
        pj.jumps = Some(JumpParams { lambda: 0.0, mu: -0.1, sigma: 0.2 });
        for (w, e) in [((1.3, -1.5), (0.7, 0.5)), ((-4.0, 0.0), (2.0, 0.0))] {
            let w = Complex64::new(w.0, w.1);
            let e = Complex64::new(e.0, e.1);
            assert_eq!(drift_a(w, e, &p).value, drift_a(w, e, &pj).value);
        }
    }

    /// Gauss–Hermite (physicists') nodes and weights by Newton iteration.
    fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
        let pi_m4 = core::f64::consts::PI.powf(-0.25);
        let mut z = 0.0;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * out[0].0,
                3 => 1.91 * z - 0.91 * out[1].0,
                _ => 2.0 * z - out[i - 2].0,
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (pi_m4, 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j - 1) as f64 / j as f64).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            out.push((z, 2.0 / (pp * pp)));
        }
        let mut all: Vec<(f64, f64)> = out.iter().map(|&(x, w)| (-x, w)).collect();
        all.extend(out.iter().rev().filter(|p| p.0 != 0.0).map(|&(x, w)| (x, w)));
        all
    }

    #[test]
    fn jump_drift_against_gauss_hermite() {
        let mut p = ModelParams::reference_sp500();
        let j = JumpParams { lambda: 0.5, mu: -0.1, sigma: 0.2 };
        p.jumps = Some(j);
        let nodes = gauss_hermite(60);
        let i = Complex64::i();
        for (w, e) in [(1.0, 0.0), (2.5, 0.0), (1.0, 3.0), (-0.7, 1.5)] {
            let (w, e) = (Complex64::new(w, 0.0), Complex64::new(e, 0.0));
            // λ E[e^{iωJ + iηJ²} - 1] with J = μ + σ√2 x
            let mut expect = Complex64::new(0.0, 0.0);
            for &(x, wt) in &nodes {
                let jump = j.mu + j.sigma * 2f64.sqrt() * x;
                expect += (i * w * jump + i * e * jump * jump).exp() * wt;
            }
            expect = (expect / core::f64::consts::PI.sqrt() - 1.0) * j.lambda;
            let compensator = i * w * (p.r - p.q - j.lambda * j.mean_relative_jump());
            let got = drift_a(w, e, &p);
            assert!(!got.branch_warning);
            assert!((got.value - compensator - expect).norm() < 1e-8, "{w} {e}");
        }
    }

    #[test]
    fn branch_hazard_flagged() {
        let mut p = ModelParams::reference_sp500();
        p.jumps = Some(JumpParams { lambda: 0.5, mu: -0.1, sigma: 0.2 });
        let d = drift_a(Complex64::new(1.0, 0.0), Complex64::new(0.0, -20.0), &p);
        assert!(d.branch_warning);
    }

    proptest! {
        #[test]
        fn coefficients_monotone_in_t_prime(th in 0.0f64..8.0, eps in 0.1f64..10.0,
                                            t in 0.0f64..1.0, d1 in 0.0f64..1.0, d2 in 0.0f64..1.0) {
            let curve = ThetaCurve::piecewise(vec![0.0, 0.7, 3.0], vec![th, th * 0.5]).unwrap();
            let (a, b) = (t + d1.min(d2), t + d1.max(d2));
            prop_assert!(coef_a(&curve, t, a).unwrap() <= coef_a(&curve, t, b).unwrap());
            prop_assert!(coef_c(&curve, eps, t, a).unwrap() <= coef_c(&curve, eps, t, b).unwrap());
        }

        #[test]
        fn piecewise_equal_values_match_constant(th in -3.0f64..8.0, t in 0.0f64..1.5, d in 0.0f64..1.5) {
            let split = ThetaCurve::piecewise(vec![0.0, 0.4, 1.1, 5.0], vec![th, th, th]).unwrap();
            let flat = ThetaCurve::constant(th);
            let (ca, fa) = (coef_c(&split, 2.0, t, t + d).unwrap(), coef_c(&flat, 2.0, t, t + d).unwrap());
            prop_assert!((ca - fa).abs() <= 1e-13 * fa.max(1e-300));
        }
    }
}
