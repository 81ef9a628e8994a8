use num_complex::Complex64;
use num_traits::Float;

use super::{check_real, Price};
use crate::model::ModelParams;
use crate::quadrature::{fourier_invert_1d, QuadratureConfig};
use crate::transforms::{interval_coefficients, JointCf, TransformPoint};
use crate::{Error, Result};

/// Contour used for the out-of-the-money put, inside `0 < Im ω < 1`.
const PUT_DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuropeanSpec {
    pub strike: f64,
    pub maturity: f64,
    pub is_call: bool,
}

impl EuropeanSpec {
    pub fn call(strike: f64, maturity: f64) -> Self {
        Self { strike, maturity, is_call: true }
    }

    pub fn put(strike: f64, maturity: f64) -> Self {
        Self { strike, maturity, is_call: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("strike must be positive, got {}", self.strike)));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("maturity must be positive, got {}", self.maturity)));
        }
        Ok(())
    }
}

/// `∫ e^{-iωx} (e^x - K)^± dx`: the call transform for `Im ω < -1` and the
/// put transform for `0 < Im ω < 1` share this expression.
fn vanilla_transform(omega: Complex64, strike: f64) -> Complex64 {
    let i = Complex64::i();
    -(strike.ln() * (1.0 - i * omega)).exp() / (omega * omega + i * omega)
}

/// European option by Fourier inversion of the log-price characteristic
/// function. Whichever of call and put is out of the money is inverted and
/// the other follows from parity.
pub fn price_european(spec: &EuropeanSpec, params: &ModelParams, cfg: &QuadratureConfig) -> Result<Price> {
    spec.validate()?;
    params.ensure_valid()?;
    cfg.validate()?;
    let (k, t) = (spec.strike, spec.maturity);
    let forward = params.s0 * ((params.r - params.q) * t).exp();
    let discount = (-params.r * t).exp();
    let call_otm = k >= forward;
    let damping = if call_otm { cfg.damping_omega } else { PUT_DAMPING };
    if call_otm && !(damping < -1.0) {
        return Err(Error::Contour(alloc::format!("call contour needs Im ω < -1, got {damping}")));
    }
    let local = QuadratureConfig { damping_omega: damping, ..cfg.clone() };

    let iv = interval_coefficients(params, 0.0, t)?;
    let x0 = params.s0.ln();
    let i = Complex64::i();
    let r = fourier_invert_1d(
        |w| Ok((i * w * x0).exp() * JointCf::new(TransformPoint::omega_only(w), params)?.eval(&iv, params.v0)?),
        |w| Ok(vanilla_transform(w, k)),
        &local,
        true,
    )?;
    let otm = discount * r.value;
    check_real(otm, discount * r.imag_residual, cfg.abs_tol)?;
    let parity = params.s0 * (-params.q * t).exp() - k * discount;
    let value = match (spec.is_call, call_otm) {
        (true, true) | (false, false) => otm,
        (true, false) => otm + parity,
        (false, true) => otm - parity,
    };
    Ok(Price {
        value,
        err_estimate: discount * r.err_estimate,
        imag_residual: discount * r.imag_residual,
        truncation_warning: r.truncation_warning,
    })
}
