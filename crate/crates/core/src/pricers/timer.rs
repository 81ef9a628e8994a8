//! Finite-maturity discrete timer call.
//!
//! The stopping rule monitors quadratic variation on the grid
//! `t_j = jT/N`; the option pays `(S_τ - K)^+` at `τ = min(T, first t_j with
//! I_{t_j} ≥ B)`. Writing the payoff as a telescoping sum of timerlets gives
//!
//! ```text
//! H(ω, η) = e^{iωx₀} [ Σ_{j=0}^{N-1} e^{-r t_{j+1}} Q_j(ω, η)
//!                     - Σ_{j=1}^{N-1} e^{-r t_j} h(0, V₀; t_j, ω, η) ]
//! Q_j     = ∫ g(0, V₀; t_j, ω, η, v') h(t_j, v'; t_{j+1}, ω, 0) dv'
//! ```
//!
//! where the terminal term has cancelled against the last subtracted
//! timerlet, and `Q_0 = h(0, V₀; t_1, ω, 0)` because g starts from a Dirac
//! mass at `V₀`. The price is `(1/4π²) ∬ F̂ H`.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::{check_real, Price};
use crate::model::ModelParams;
use crate::quadrature::{parseval_double, EtaAxis, LogGrid, OmegaAxis, ParsevalResult, QuadratureConfig};
use crate::transforms::{
    interval_coefficients, log_spread, IntervalCoefficients, JointCf, PartialTransform, TransformPoint,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimerOptionSpec {
    pub strike: f64,
    /// Mandatory maturity T.
    pub maturity: f64,
    /// Number of monitoring dates N.
    pub n_monitoring: usize,
    /// Variance budget B.
    pub budget: f64,
}

impl TimerOptionSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.strike > 0.0
            && self.strike.is_finite()
            && self.maturity > 0.0
            && self.maturity.is_finite()
            && self.n_monitoring >= 1
            && self.budget > 0.0
            && self.budget.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(alloc::format!("invalid timer spec {self:?}")))
        }
    }

    pub fn monitoring_dates(&self) -> Vec<f64> {
        let n = self.n_monitoring;
        (0..=n).map(|j| if j == n { self.maturity } else { self.maturity * j as f64 / n as f64 }).collect()
    }
}

/// `∬ e^{-iωx - iηy} (e^x - K)^+ 1{y < B} dx dy`.
pub fn payoff_transform_timer(omega: Complex64, eta: Complex64, strike: f64, budget: f64) -> Result<Complex64> {
    if !(omega.im < -1.0 && eta.im > 0.0) {
        return Err(Error::Contour(alloc::format!(
            "timer payoff needs Im ω < -1 and Im η > 0, got ω = {omega}, η = {eta}"
        )));
    }
    let i = Complex64::i();
    let num = (strike.ln() * (1.0 - i * omega) - i * eta * budget).exp();
    Ok(num / ((i * omega + omega * omega) * i * eta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimerPrice {
    pub price: Price,
    pub parseval: ParsevalResult,
    /// Relative error of each v' grid on its envelope, `j = 1..N-1`.
    pub grid_rel_err: Vec<f64>,
}

struct Leg {
    /// [0, t_j]
    to_start: IntervalCoefficients,
    /// [t_j, t_{j+1}]
    step: IntervalCoefficients,
    grid: LogGrid,
}

pub fn price_timer_call(spec: &TimerOptionSpec, params: &ModelParams, cfg: &QuadratureConfig) -> Result<TimerPrice> {
    spec.validate()?;
    params.ensure_valid()?;
    cfg.validate_timer()?;
    let dates = spec.monitoring_dates();
    let n = spec.n_monitoring;
    let v0 = params.v0;
    let x0 = params.s0.ln();
    let i = Complex64::i();

    let omega_axis = OmegaAxis {
        damping: cfg.damping_omega,
        step: cfg.omega_step(),
        truncation: cfg.fourier_truncation,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
    };
    let eta_axis = EtaAxis::timer(cfg, spec.budget);
    let eta_damping = eta_axis.nodes()[0].im;
    let envelope_point = TransformPoint::new(i * cfg.damping_omega, i * eta_damping);
    let env_g = PartialTransform::new(envelope_point, params)?;
    let env_h = JointCf::new(TransformPoint::omega_only(i * cfg.damping_omega), params)?;

    let mut legs = Vec::with_capacity(n.saturating_sub(1));
    let mut grid_rel_err = Vec::with_capacity(n.saturating_sub(1));
    for j in 1..n {
        let to_start = interval_coefficients(params, 0.0, dates[j])?;
        let step = interval_coefficients(params, dates[j], dates[j + 1])?;
        let envelope = |vp: f64| Ok((env_g.eval(&to_start, v0, vp)? * env_h.eval(&step, vp)?).norm());
        let grid =
            LogGrid::from_envelope(envelope, v0, log_spread(params, v0, dates[j]), cfg.v_nodes, cfg.v_upper_mass_tol)?;
        // accuracy of the grid on its own envelope, against twice the density
        let nodes = grid.nodes();
        let dense = LogGrid::new(nodes[0].ln(), nodes[nodes.len() - 1].ln(), 2 * nodes.len() - 1);
        let on = |g: &LogGrid| -> Result<Complex64> {
            let vals =
                g.nodes().iter().map(|&vp| envelope(vp).map(|m| Complex64::new(m, 0.0))).collect::<Result<Vec<_>>>()?;
            Ok(g.integrate(&vals).value)
        };
        let (coarse, fine) = (on(&grid)?, on(&dense)?);
        grid_rel_err.push((coarse - fine).norm() / fine.norm());
        legs.push(Leg { to_start, step, grid });
    }
    let first = interval_coefficients(params, 0.0, dates[1])?;
    let discount: Vec<f64> = dates.iter().map(|t| (-params.r * t).exp()).collect();

    let row = |w: Complex64, etas: &[Complex64]| -> Result<Vec<Complex64>> {
        let marginal = JointCf::new(TransformPoint::omega_only(w), params)?;
        let q0 = marginal.eval(&first, v0)? * discount[1];
        // h(t_j, v'; t_{j+1}, ω, 0) × node weight × discount, per leg
        let weighted: Vec<Vec<Complex64>> = legs
            .iter()
            .enumerate()
            .map(|(idx, leg)| {
                let d = discount[idx + 2];
                leg.grid
                    .nodes()
                    .iter()
                    .zip(leg.grid.weights())
                    .map(|(&vp, &wt)| Ok(marginal.eval(&leg.step, vp)? * (wt * d)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let level = (i * w * x0).exp();
        etas.iter()
            .map(|&e| {
                let point = TransformPoint::new(w, e);
                let g = PartialTransform::new(point, params)?;
                let joint = JointCf::new(point, params)?;
                let mut acc = crate::quadrature::CompensatedSum::new();
                acc.add(q0);
                for (idx, leg) in legs.iter().enumerate() {
                    for (&vp, hw) in leg.grid.nodes().iter().zip(&weighted[idx]) {
                        acc.add(g.eval(&leg.to_start, v0, vp)? * *hw);
                    }
                    acc.add(-joint.eval(&leg.to_start, v0)? * discount[idx + 1]);
                }
                Ok(payoff_transform_timer(w, e, spec.strike, spec.budget)? * level * acc.total())
            })
            .collect()
    };

    let parseval = parseval_double(row, &omega_axis, &eta_axis)?;
    check_real(parseval.value, parseval.imag_residual, cfg.abs_tol)?;
    let grid_err = grid_rel_err.iter().fold(0.0f64, |a, &b| a.max(b));
    let price = Price {
        value: parseval.value,
        err_estimate: parseval.err_estimate + grid_err * parseval.value.abs(),
        imag_residual: parseval.imag_residual,
        truncation_warning: parseval.truncation_warning,
    };
    Ok(TimerPrice { price, parseval, grid_rel_err })
}
