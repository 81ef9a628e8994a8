//! Finite-difference derivatives of characteristic functions at the origin.
//!
//! Derivatives of order 1 to 3 are taken from samples at
//! `0, ±h, ±2h, ±4h, ±8h`. Central differences at steps `s` and `2s` are
//! Richardson-combined into `R(s)`; the estimates `R(h)` and `R(2h)` must
//! agree to a relative `1e-5` (with an absolute floor) or the derivative is
//! rejected.

use num_complex::Complex64;
use num_traits::Float;

use crate::{Error, Result};

/// Sample offsets in units of the step.
pub const STENCIL: [f64; 9] = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0];

const AGREEMENT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub step: f64,
    /// Magnitude below which disagreement is measured absolutely.
    pub floor: f64,
}

impl Stencil {
    pub fn new(step: f64, floor: f64) -> Self {
        Self { step, floor }
    }

    /// Stencil for moments of the log-return over an interval of length
    /// `delta` when variance is near `v`: step 0.25% of the inverse return
    /// standard deviation.
    pub fn for_returns(v: f64, delta: f64, order: u32) -> Self {
        let s = (v * delta).sqrt();
        Self::new(0.0025 / s, 1e-3 * s.powi(order as i32))
    }

    pub fn points(&self) -> [f64; 9] {
        STENCIL.map(|k| k * self.step)
    }

    /// `(R(h), R(2h))` for the derivative of the given order.
    pub fn estimates(&self, order: u32, f: &[Complex64]) -> (Complex64, Complex64) {
        assert_eq!(f.len(), 9);
        let at = |k: i32| -> Complex64 {
            let idx = match k {
                -8 => 0,
                -4 => 1,
                -2 => 2,
                -1 => 3,
                0 => 4,
                1 => 5,
                2 => 6,
                4 => 7,
                8 => 8,
                _ => unreachable!(),
            };
            f[idx]
        };
        let h = self.step;
        let d = |s: i32| -> Complex64 {
            let sf = s as f64 * h;
            match order {
                1 => (at(s) - at(-s)) / (2.0 * sf),
                2 => (at(s) - at(0) * 2.0 + at(-s)) / (sf * sf),
                3 => (at(2 * s) - at(s) * 2.0 + at(-s) * 2.0 - at(-2 * s)) / (2.0 * sf * sf * sf),
                _ => panic!("derivative order {order} not supported"),
            }
        };
        let (d1, d2, d4) = (d(1), d(2), d(4));
        ((d1 * 4.0 - d2) / 3.0, (d2 * 4.0 - d4) / 3.0)
    }

    /// Richardson-extrapolated derivative, rejected when the two levels disagree.
    pub fn derivative(&self, order: u32, f: &[Complex64]) -> Result<Complex64> {
        let (fine, coarse) = self.estimates(order, f);
        let disagreement = (fine - coarse).norm() / fine.norm().max(self.floor);
        if disagreement > AGREEMENT || !disagreement.is_finite() {
            return Err(Error::Derivative { disagreement });
        }
        Ok(fine)
    }
}

/// `i^{-m}`.
pub fn i_pow_neg(m: u32) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(st: &Stencil, f: impl Fn(f64) -> Complex64) -> [Complex64; 9] {
        st.points().map(f)
    }

    #[test]
    fn gaussian_cf_moments() {
        // CF of N(μ, σ²): moments μ, σ² + μ², μ³ + 3μσ²
        let (mu, s) = (0.001, 0.015);
        let cf = |p: f64| (Complex64::i() * p * mu - 0.5 * p * p * s * s).exp();
        let st = Stencil::for_returns(s * s, 1.0, 2);
        let f = sample(&st, cf);
        let m1 = (st.derivative(1, &f).unwrap() * i_pow_neg(1)).re;
        let m2 = (st.derivative(2, &f).unwrap() * i_pow_neg(2)).re;
        let st3 = Stencil::for_returns(s * s, 1.0, 3);
        let m3 = (st3.derivative(3, &sample(&st3, cf)).unwrap() * i_pow_neg(3)).re;
        assert!((m1 - mu).abs() < 1e-8 * mu, "{m1}");
        assert!((m2 - (s * s + mu * mu)).abs() < 1e-8 * s * s, "{m2}");
        let want3 = mu.powi(3) + 3.0 * mu * s * s;
        assert!((m3 - want3).abs() < 1e-6 * want3, "{m3} vs {want3}");
    }

    #[test]
    fn noisy_samples_are_rejected() {
        let st = Stencil::new(0.5, 1e-6);
        let mut f = sample(&st, |p| Complex64::new((-p * p).exp(), 0.0));
        f[2] += Complex64::new(1e-3, 0.0);
        assert!(matches!(st.derivative(2, &f), Err(Error::Derivative { .. })));
    }

    #[test]
    fn powers_of_i() {
        for m in 0..8 {
            let want = Complex64::i().powi(-(m as i32));
            assert!((i_pow_neg(m) - want).norm() < 1e-15);
        }
    }
}
