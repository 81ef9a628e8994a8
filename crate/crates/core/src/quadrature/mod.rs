//! Numerical integration: semi-infinite integrals over the variance argument,
//! one-dimensional Fourier inversion along a damped contour and the
//! two-dimensional Parseval integral.
//!
//! Defaults:
//!
//! | field                | default | meaning                                              |
//! |----------------------|---------|------------------------------------------------------|
//! | `v_nodes`            | 64      | trapezoid nodes of fixed v' grids                    |
//! | `v_upper_mass_tol`   | 1e-16   | integrand envelope cutoff, relative to its peak      |
//! | `fourier_nodes`      | 4096    | nodes across `[-fourier_truncation, fourier_truncation]` |
//! | `fourier_truncation` | 200     | initial half-width in Re ω (extended adaptively)     |
//! | `damping_omega`      | -1.5    | Im ω of the inversion contour                        |
//! | `damping_eta`        | 0.5     | Im η for the trapezoid η axis                        |
//! | `eta_axis`           | series  | η rule for the timer integral                        |
//! | `series_aliasing`    | 18.4    | Fourier-series damping `A` (η_I = A / 2B)            |
//! | `series_terms`       | 20      | plain terms per side before Euler averaging          |
//! | `series_order`       | 12      | Euler averaging order                                |
//! | `rel_tol`            | 1e-9    | relative tolerance of adaptive rules                 |
//! | `abs_tol`            | 1e-12   | absolute tolerance of adaptive rules                 |

mod fourier;
mod semi_infinite;

pub use fourier::{euler_sum, fourier_invert_1d, parseval_double, EtaAxis, FourierResult, OmegaAxis, ParsevalResult};
pub use semi_infinite::{integrate_semi_infinite, integrate_semi_infinite_around, LogGrid};

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaAxisKind {
    /// Truncated trapezoid on the contour `Im η = damping_eta`.
    Trapezoid,
    /// Fourier-series rule with step π/B and Euler-accelerated tails.
    FourierSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub v_nodes: usize,
    pub v_upper_mass_tol: f64,
    pub fourier_nodes: usize,
    pub fourier_truncation: f64,
    pub damping_omega: f64,
    pub damping_eta: f64,
    pub eta_axis: EtaAxisKind,
    pub series_aliasing: f64,
    pub series_terms: usize,
    pub series_order: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            v_nodes: 64,
            v_upper_mass_tol: 1e-16,
            fourier_nodes: 4096,
            fourier_truncation: 200.0,
            damping_omega: -1.5,
            damping_eta: 0.5,
            eta_axis: EtaAxisKind::FourierSeries,
            series_aliasing: 18.4,
            series_terms: 20,
            series_order: 12,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
        }
    }
}

impl QuadratureConfig {
    /// Coarser defaults for the timer integral, whose integrand is a sum of
    /// N timerlets each needing a v' integral. The deeper ω contour keeps
    /// the aliasing of the step-doubled comparison rule small.
    pub fn timer() -> Self {
        Self {
            v_nodes: 48,
            fourier_nodes: 400,
            fourier_truncation: 40.0,
            damping_omega: -2.0,
            series_terms: 12,
            series_order: 8,
            rel_tol: 1e-7,
            ..Self::default()
        }
    }

    /// Step in Re ω.
    pub fn omega_step(&self) -> f64 {
        2.0 * self.fourier_truncation / self.fourier_nodes as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(alloc::format!("quadrature config: {m}")));
        if self.v_nodes < 8 || self.fourier_nodes < 8 || self.series_terms < 8 {
            return bad("node counts must be at least 8");
        }
        let positive =
            [self.v_upper_mass_tol, self.fourier_truncation, self.rel_tol, self.abs_tol, self.series_aliasing];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return bad("tolerances and truncation must be positive and finite");
        }
        if !self.damping_omega.is_finite() || !self.damping_eta.is_finite() {
            return bad("damping must be finite");
        }
        Ok(())
    }

    /// The timer payoff transform needs Im ω < -1 and Im η > 0.
    pub fn validate_timer(&self) -> Result<()> {
        self.validate()?;
        if !(self.damping_omega < -1.0) {
            return Err(Error::Contour(alloc::format!("damping_omega = {} must be < -1", self.damping_omega)));
        }
        if self.eta_axis == EtaAxisKind::Trapezoid && !(self.damping_eta > 0.0) {
            return Err(Error::Contour(alloc::format!("damping_eta = {} must be > 0", self.damping_eta)));
        }
        Ok(())
    }
}

/// Value with an achieved-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub err_estimate: f64,
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (s, c) = *acc;
    let t = s + x;
    let c = if s.abs() >= x.abs() { c + ((s - t) + x) } else { c + ((x - t) + s) };
    *acc = (t, c);
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

impl core::iter::FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = Self::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}
