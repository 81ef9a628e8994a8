//! Product valuation: European vanillas, finite-maturity discrete timer
//! calls and discretely sampled weighted moment swaps.

mod derivative;
mod european;
mod swaps;
mod timer;

pub use derivative::{i_pow_neg, Stencil, STENCIL};
pub use european::{price_european, EuropeanSpec};
pub use swaps::{
    expected_quadratic_variation, fair_strike, fair_strike_deterministic_weight, fair_strike_self_quantoed,
    fair_strike_weighted, moment_expectation, Lag, MomentSwapSpec, StrikeResult, WeightKind,
};
pub use timer::{payoff_transform_timer, price_timer_call, TimerOptionSpec, TimerPrice};

use num_traits::Float;

use crate::{Error, Result};

/// Relative size of the imaginary part tolerated in a real price.
pub const IMAG_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Price {
    pub value: f64,
    pub err_estimate: f64,
    pub imag_residual: f64,
    pub truncation_warning: bool,
}

/// Rejects a price whose imaginary residual exceeds `IMAG_TOLERANCE × |real|`
/// beyond the absolute floor `abs_floor`.
pub(crate) fn check_real(real: f64, imag: f64, abs_floor: f64) -> Result<()> {
    if imag.abs() > IMAG_TOLERANCE * real.abs() + abs_floor {
        Err(Error::ImaginaryResidual { real, imag })
    } else {
        Ok(())
    }
}
