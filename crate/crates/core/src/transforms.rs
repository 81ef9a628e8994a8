//! Closed-form transforms of the triple (X, I, V): the partial transform g,
//! the joint characteristic function h, the variance transition densities,
//! the conditional characteristic function of integrated variance and the
//! bivariate characteristic function Φ.
//!
//! The evaluators ([`PartialTransform`], [`JointCf`]) cache everything that
//! depends only on (ω, η) so that sweeping the time interval or the variance
//! arguments costs one special-function evaluation per point.

use num_complex::Complex64;
use num_traits::Float;

use crate::model::{coef_c, drift_a, Drift, ModelParams};
use crate::quadrature::{integrate_semi_infinite_around, QuadResult, QuadratureConfig};
use crate::specfun::{BesselOrder, Kummer};
use crate::{Error, Result};

/// Intervals shorter than this are treated as the Dirac terminal condition.
pub const DIRAC_REGIME: f64 = 1e-10;

/// Fourier arguments: ω for log-price, η for quadratic variation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformPoint {
    pub omega: Complex64,
    pub eta: Complex64,
}

impl TransformPoint {
    pub fn new(omega: Complex64, eta: Complex64) -> Self {
        Self { omega, eta }
    }

    pub fn real(omega: f64, eta: f64) -> Self {
        Self::new(Complex64::new(omega, 0.0), Complex64::new(eta, 0.0))
    }

    /// (ω, 0): the marginal transform of log-price.
    pub fn omega_only(omega: Complex64) -> Self {
        Self::new(omega, Complex64::new(0.0, 0.0))
    }
}

/// Coefficients that depend on (ω, η) but not on time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCoefficients {
    /// κ̃ = κ - iωρε.
    pub kappa_tilde: Complex64,
    /// c, principal square root of `power² + (iω + ω² - 2iη)/ε²`.
    pub exponent: Complex64,
    /// 1/2 + κ̃/ε².
    pub power: Complex64,
    /// α̃ = c - (1/2 + κ̃/ε²).
    pub alpha: Complex64,
    /// β̃ = 1 + 2c.
    pub beta: Complex64,
    pub drift: Drift,
}

pub fn point_coefficients(point: TransformPoint, params: &ModelParams) -> PointCoefficients {
    let i = Complex64::i();
    let (w, e) = (point.omega, point.eta);
    let eps2 = params.epsilon * params.epsilon;
    let kappa_tilde = params.kappa - i * w * (params.rho * params.epsilon);
    let power = kappa_tilde / eps2 + 0.5;
    let exponent = (power * power + (i * w + w * w - i * e * 2.0) / eps2).sqrt();
    PointCoefficients {
        kappa_tilde,
        exponent,
        power,
        alpha: exponent - power,
        beta: exponent * 2.0 + 1.0,
        drift: drift_a(w, e, params),
    }
}

/// Coefficients that depend on the interval [t, t'] only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalCoefficients {
    pub delta: f64,
    /// ln A = ∫θ.
    pub log_growth: f64,
    /// A.
    pub growth: f64,
    /// C.
    pub scale: f64,
}

pub fn interval_coefficients(params: &ModelParams, t: f64, t_prime: f64) -> Result<IntervalCoefficients> {
    let log_growth = params.theta.integral(t, t_prime)?;
    Ok(IntervalCoefficients {
        delta: t_prime - t,
        log_growth,
        growth: log_growth.exp(),
        scale: coef_c(&params.theta, params.epsilon, t, t_prime)?,
    })
}

impl IntervalCoefficients {
    fn check_regime(&self) -> Result<()> {
        if self.delta < DIRAC_REGIME {
            Err(Error::DeltaRegime { delta: self.delta })
        } else {
            Ok(())
        }
    }

    /// Bessel argument (2/C) sqrt(A/(v v')).
    pub fn bessel_argument(&self, v: f64, v_prime: f64) -> f64 {
        2.0 / self.scale * (self.growth / (v * v_prime)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCoefficients {
    pub point: PointCoefficients,
    pub interval: IntervalCoefficients,
}

impl TransformCoefficients {
    /// Re c > 1/2 + κ/ε², which holds for real (ω, η) and may fail on
    /// shifted contours.
    pub fn satisfies_branch_bound(&self, params: &ModelParams) -> bool {
        self.point.exponent.re > 0.5 + params.kappa_over_eps2()
    }
}

pub fn coefficients(
    point: TransformPoint,
    params: &ModelParams,
    t: f64,
    t_prime: f64,
) -> Result<TransformCoefficients> {
    Ok(TransformCoefficients {
        point: point_coefficients(point, params),
        interval: interval_coefficients(params, t, t_prime)?,
    })
}

/// g(t, v; t', ω, η, v') for a fixed (ω, η).
#[derive(Debug, Clone, Copy)]
pub struct PartialTransform {
    pc: PointCoefficients,
    order: BesselOrder,
}

impl PartialTransform {
    pub fn new(point: TransformPoint, params: &ModelParams) -> Result<Self> {
        let pc = point_coefficients(point, params);
        Ok(Self { pc, order: BesselOrder::new(pc.exponent * 2.0)? })
    }

    pub fn coefficients(&self) -> &PointCoefficients {
        &self.pc
    }

    /// ln g. The exponential factor of the Bessel function is cancelled
    /// against `exp(-(Av + v')/(Cvv'))` analytically:
    /// `-(Av + v')/(Cvv') + z = -(sqrt(A/v') - sqrt(1/v))²/C`.
    pub fn ln_eval(&self, iv: &IntervalCoefficients, v: f64, v_prime: f64) -> Result<Complex64> {
        iv.check_regime()?;
        let (a, c) = (iv.growth, iv.scale);
        let z = iv.bessel_argument(v, v_prime);
        let gap = (a / v_prime).sqrt() - (1.0 / v).sqrt();
        let ln_i_scaled = self.order.ln_i_scaled(Complex64::new(z, 0.0))?;
        let (lv, lvp) = (v.ln(), v_prime.ln());
        Ok(self.pc.drift.value * iv.delta + iv.log_growth - c.ln() - gap * gap / c - 2.0 * lvp
            + self.pc.power * (iv.log_growth + lv - lvp)
            + ln_i_scaled)
    }

    pub fn eval(&self, iv: &IntervalCoefficients, v: f64, v_prime: f64) -> Result<Complex64> {
        exp_checked(self.ln_eval(iv, v, v_prime)?, "partial_transform_g")
    }
}

/// h(t, v; t', ω, η) for a fixed (ω, η).
#[derive(Debug, Clone, Copy)]
pub struct JointCf {
    pc: PointCoefficients,
    kummer: Kummer,
    /// ln Γ(β̃ - α̃) - ln Γ(β̃).
    ln_gamma_ratio: Complex64,
}

impl JointCf {
    pub fn new(point: TransformPoint, params: &ModelParams) -> Result<Self> {
        let pc = point_coefficients(point, params);
        let kummer = Kummer::new(pc.alpha, pc.beta)?;
        let ln_gamma_ratio = if pc.alpha == Complex64::new(0.0, 0.0) {
            Complex64::new(0.0, 0.0)
        } else {
            crate::specfun::log_gamma(pc.beta - pc.alpha)? - crate::specfun::log_gamma(pc.beta)?
        };
        Ok(Self { pc, kummer, ln_gamma_ratio })
    }

    pub fn coefficients(&self) -> &PointCoefficients {
        &self.pc
    }

    pub fn ln_eval(&self, iv: &IntervalCoefficients, v: f64) -> Result<Complex64> {
        if iv.delta == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let x = 1.0 / (iv.scale * v);
        let ln_m = self.kummer.ln_m(Complex64::new(-x, 0.0))?;
        let power =
            if self.pc.alpha == Complex64::new(0.0, 0.0) { Complex64::new(0.0, 0.0) } else { self.pc.alpha * x.ln() };
        Ok(self.pc.drift.value * iv.delta + self.ln_gamma_ratio + power + ln_m)
    }

    pub fn eval(&self, iv: &IntervalCoefficients, v: f64) -> Result<Complex64> {
        if iv.delta == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        exp_checked(self.ln_eval(iv, v)?, "joint_cf_h")
    }
}

fn exp_checked(v: Complex64, function: &'static str) -> Result<Complex64> {
    if v.re == f64::NEG_INFINITY {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let out = v.exp();
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow { function })
    }
}

/// Partial transform g(t, v; t', ω, η, v').
pub fn partial_transform_g(
    t: f64,
    v: f64,
    t_prime: f64,
    point: TransformPoint,
    v_prime: f64,
    params: &ModelParams,
) -> Result<Complex64> {
    let iv = interval_coefficients(params, t, t_prime)?;
    PartialTransform::new(point, params)?.eval(&iv, v, v_prime)
}

/// g1(t, v; t', ω, v') = g(t, v; t', ω, 0, v').
pub fn partial_transform_g1(
    t: f64,
    v: f64,
    t_prime: f64,
    omega: Complex64,
    v_prime: f64,
    params: &ModelParams,
) -> Result<Complex64> {
    partial_transform_g(t, v, t_prime, TransformPoint::omega_only(omega), v_prime, params)
}

/// Joint characteristic function h(t, v; t', ω, η) of (X_{t'} - X_t, I_{t'} - I_t).
pub fn joint_cf_h(t: f64, v: f64, t_prime: f64, point: TransformPoint, params: &ModelParams) -> Result<Complex64> {
    let iv = interval_coefficients(params, t, t_prime)?;
    JointCf::new(point, params)?.eval(&iv, v)
}

/// Transition density of V from (t, v) to (t', v').
pub fn transition_density_v(t: f64, v: f64, t_prime: f64, v_prime: f64, params: &ModelParams) -> Result<f64> {
    partial_transform_g(t, v, t_prime, TransformPoint::real(0.0, 0.0), v_prime, params).map(|g| g.re)
}

/// Transition density of U = 1/V (a time-inhomogeneous CIR process), written
/// directly as the scaled noncentral chi-square law.
pub fn transition_density_u(t: f64, u: f64, t_prime: f64, u_prime: f64, params: &ModelParams) -> Result<f64> {
    let iv = interval_coefficients(params, t, t_prime)?;
    iv.check_regime()?;
    let (a, c) = (iv.growth, iv.scale);
    let nu = 1.0 + 2.0 * params.kappa_over_eps2();
    let z = 2.0 * (a * u * u_prime).sqrt() / c;
    let ln_i = BesselOrder::new(Complex64::new(nu, 0.0))?.ln_i(Complex64::new(z, 0.0))?.re;
    let ln_p = (a / c).ln() - (a * u_prime + u) / c + 0.5 * nu * (a * u_prime / u).ln() + ln_i;
    Ok(ln_p.exp())
}

/// E[exp(iξ ∫_t^{t'} V ds) | V_t = v, V_{t'} = v'].
pub fn conditional_cf_integrated_variance(
    xi: Complex64,
    t: f64,
    t_prime: f64,
    v: f64,
    v_prime: f64,
    params: &ModelParams,
) -> Result<Complex64> {
    let iv = interval_coefficients(params, t, t_prime)?;
    iv.check_regime()?;
    let eps2 = params.epsilon * params.epsilon;
    let nu0 = Complex64::new(1.0 + 2.0 * params.kappa / eps2, 0.0);
    let nu_hat =
        if xi == Complex64::new(0.0, 0.0) { nu0 } else { (nu0 * nu0 - Complex64::i() * xi * (8.0 / eps2)).sqrt() };
    let z = Complex64::new(iv.bessel_argument(v, v_prime), 0.0);
    let num = BesselOrder::new(nu_hat)?.ln_i_scaled(z)?;
    let den = BesselOrder::new(nu0)?.ln_i_scaled(z)?;
    exp_checked(num - den, "conditional_cf_integrated_variance")
}

/// ξ for which E[e^{iω(X_{t'} - X_t) + iη(I_{t'} - I_t)} | V path] equals
/// [`factorization_prefactor`] times e^{iξ ∫V}.
///
/// From `X_{t'} - X_t = (r - q)Δ + (ρ/ε)(ln V_{t'}/V_t - ∫θ)
/// + (ρε(κ/ε² + 1/2) - 1/2) ∫V + sqrt(1 - ρ²) ∫ sqrt(V) dW²`.
pub fn factorization_xi(point: TransformPoint, params: &ModelParams) -> Complex64 {
    let (w, e) = (point.omega, point.eta);
    let (rho, eps) = (params.rho, params.epsilon);
    let drift_per_variance = rho * eps * (params.kappa_over_eps2() + 0.5) - 0.5;
    w * drift_per_variance + Complex64::i() * w * w * (0.5 * (1.0 - rho * rho)) + e
}

/// e^{aΔ} (v'/(A v))^{iωρ/ε}.
pub fn factorization_prefactor(
    point: TransformPoint,
    params: &ModelParams,
    iv: &IntervalCoefficients,
    v: f64,
    v_prime: f64,
) -> Complex64 {
    let drift = drift_a(point.omega, point.eta, params).value;
    let log_ratio = v_prime.ln() - iv.log_growth - v.ln();
    (drift * iv.delta + Complex64::i() * point.omega * (params.rho / params.epsilon * log_ratio)).exp()
}

/// g assembled from the conditional law of ∫V given the variance endpoints:
/// prefactor × conditional CF at [`factorization_xi`] × variance density.
pub fn partial_transform_g_factorized(
    t: f64,
    v: f64,
    t_prime: f64,
    point: TransformPoint,
    v_prime: f64,
    params: &ModelParams,
) -> Result<Complex64> {
    let iv = interval_coefficients(params, t, t_prime)?;
    let xi = factorization_xi(point, params);
    let ccf = conditional_cf_integrated_variance(xi, t, t_prime, v, v_prime, params)?;
    let density = transition_density_v(t, v, t_prime, v_prime, params)?;
    Ok(factorization_prefactor(point, params, &iv, v, v_prime) * ccf * density)
}

/// Rough standard deviation of ln V_{t+Δ} given V_t = v, used to size
/// quadrature scans.
pub fn log_spread(params: &ModelParams, v: f64, delta: f64) -> f64 {
    (params.epsilon * (v * delta).sqrt()).clamp(0.02, 2.0)
}

/// State (x, y, v) = (log-price, quadratic variation, variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub v: f64,
}

/// Φ = E[exp(iω1 X_{t1} + iη1 I_{t1} + iω2 X_{t2} + iη2 I_{t2}) | state at t].
#[allow(clippy::too_many_arguments)]
pub fn bivariate_cf_phi(
    t: f64,
    state: State,
    t1: f64,
    t2: f64,
    w: (Complex64, Complex64),
    e: (Complex64, Complex64),
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    if !(t < t1 && t1 <= t2) {
        return Err(Error::InvalidArgument(alloc::format!("need t < t1 <= t2, got {t}, {t1}, {t2}")));
    }
    let i = Complex64::i();
    let outer = TransformPoint::new(w.0 + w.1, e.0 + e.1);
    let level = (i * outer.omega * state.x + i * outer.eta * state.y).exp();
    let iv1 = interval_coefficients(params, t, t1)?;
    if t1 == t2 {
        let h = JointCf::new(outer, params)?.eval(&iv1, state.v)?;
        return Ok(QuadResult { value: level * h, err_estimate: 0.0 });
    }
    let iv2 = interval_coefficients(params, t1, t2)?;
    let g = PartialTransform::new(outer, params)?;
    let h = JointCf::new(TransformPoint::new(w.1, e.1), params)?;
    let spread = log_spread(params, state.v, iv1.delta);
    let r =
        integrate_semi_infinite_around(|vp| Ok(g.eval(&iv1, state.v, vp)? * h.eval(&iv2, vp)?), state.v, spread, cfg)?;
    Ok(QuadResult { value: level * r.value, err_estimate: level.norm() * r.err_estimate })
}
