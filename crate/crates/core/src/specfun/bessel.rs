use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use super::gamma::log_gamma;
use super::{MAX_TERMS, SERIES_TOL};
use crate::{Error, Result};

/// |z| above which the large-argument expansion is tried.
///
/// The expansion is only used when it also converges to full precision
/// before its terms start growing, and when the exponentially small
/// companion term `e^{-z} e^{±iπν}` is negligible; otherwise the power series
/// is used. See `tests::threshold_accuracy` for the overlap study.
pub const BESSEL_ASYMPTOTIC_THRESHOLD: f64 = 30.0;

/// Required margin `2 Re z - π |Im ν|` before the companion term is dropped.
const COMPANION_MARGIN: f64 = 40.0;

const RESCALE: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4;

/// A Bessel order with its Gamma factor cached.
///
/// Evaluating the same order at many arguments (the v' quadrature nodes of a
/// transform) costs one ln Γ in total instead of one per node.
#[derive(Debug, Clone, Copy)]
pub struct BesselOrder {
    nu: Complex64,
    ln_gamma_nu1: Complex64,
    mu: Complex64,
}

impl BesselOrder {
    pub fn new(nu: Complex64) -> Result<Self> {
        // I_{-n} = I_n for integer n
        let nu = if nu.im == 0.0 && nu.re < 0.0 && nu.re == nu.re.round() { -nu } else { nu };
        Ok(Self { nu, ln_gamma_nu1: log_gamma(nu + 1.0)?, mu: nu * nu * 4.0 })
    }

    pub fn nu(&self) -> Complex64 {
        self.nu
    }

    /// ln I_ν(z) on the principal branch of z^ν.
    ///
    /// At z = 0 this returns `-inf` for Re ν > 0 and `0` for ν = 0.
    pub fn ln_i(&self, z: Complex64) -> Result<Complex64> {
        if z.is_zero() {
            return if self.nu.is_zero() {
                Ok(Complex64::zero())
            } else if self.nu.re > 0.0 {
                Ok(Complex64::new(f64::NEG_INFINITY, 0.0))
            } else {
                Err(Error::Pole { function: "bessel_i", at: z })
            };
        }
        if self.asymptotic_admissible(z) {
            if let Some(v) = self.ln_asymptotic(z) {
                return Ok(v);
            }
        }
        self.ln_series(z)
    }

    /// ln(e^{-Re z} I_ν(z)).
    pub fn ln_i_scaled(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.ln_i(z)? - z.re)
    }

    fn asymptotic_admissible(&self, z: Complex64) -> bool {
        z.norm() > BESSEL_ASYMPTOTIC_THRESHOLD && z.re > 0.0 && 2.0 * z.re - PI * self.nu.im.abs() > COMPANION_MARGIN
    }

    pub(crate) fn ln_series(&self, z: Complex64) -> Result<Complex64> {
        let half = z * 0.5;
        let q = half * half;
        let lead = self.nu * half.ln() - self.ln_gamma_nu1;
        let qn = q.norm();

        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut shift = 0.0;
        let mut small = 0;
        for k in 1..=MAX_TERMS {
            let kf = k as f64;
            let denom = (self.nu + kf) * kf;
            term = term * q / denom;
            sum += term;
            if sum.l1_norm() > RESCALE {
                term /= RESCALE;
                sum /= RESCALE;
                shift += LN_RESCALE;
            }
            let decaying = qn < denom.norm();
            if decaying && term.l1_norm() <= SERIES_TOL * sum.l1_norm() {
                small += 1;
                if small >= 2 {
                    return Ok(lead + shift + sum.ln());
                }
            } else {
                small = 0;
            }
        }
        Err(Error::NonConvergence { function: "bessel_i", terms: MAX_TERMS })
    }

    /// Hankel expansion `e^z / sqrt(2πz) Σ (-1)^k a_k(ν) / z^k`; `None` if it
    /// diverges before reaching full precision.
    pub(crate) fn ln_asymptotic(&self, z: Complex64) -> Option<Complex64> {
        let inv8z = (z * 8.0).inv();
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut prev = 1.0;
        for k in 1..200 {
            let f = (2 * k - 1) as f64;
            term = -term * (self.mu - f * f) * inv8z / k as f64;
            let size = term.l1_norm();
            if size > prev {
                return None;
            }
            sum += term;
            if size <= SERIES_TOL * sum.l1_norm() {
                return Some(z - 0.5 * (z * (2.0 * PI)).ln() + sum.ln());
            }
            prev = size;
        }
        None
    }
}

/// I_ν(z).
pub fn bessel_i(nu: Complex64, z: Complex64) -> Result<Complex64> {
    let v = BesselOrder::new(nu)?.ln_i(z)?;
    finite_exp(v, "bessel_i")
}

/// e^{-Re z} I_ν(z).
pub fn bessel_i_scaled(nu: Complex64, z: Complex64) -> Result<Complex64> {
    let v = BesselOrder::new(nu)?.ln_i_scaled(z)?;
    finite_exp(v, "bessel_i_scaled")
}

/// ln I_ν(z).
pub fn ln_bessel_i(nu: Complex64, z: Complex64) -> Result<Complex64> {
    BesselOrder::new(nu)?.ln_i(z)
}

pub(crate) fn finite_exp(v: Complex64, function: &'static str) -> Result<Complex64> {
    if v.re == f64::NEG_INFINITY {
        return Ok(Complex64::zero());
    }
    let out = v.exp();
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow { function })
    }
}

#[cfg(test)]
// reference values are kept as printed by the high-precision source
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(bessel_i(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(bessel_i(c(1.5, 0.0), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let want = (2.0 / (PI * 2.0)).sqrt() * 2f64.sinh();
        let got = bessel_i(c(0.5, 0.0), c(2.0, 0.0)).unwrap();
        assert!(rel(got, c(want, 0.0)) < 1e-14);
        // I_{1/2}(z) = sqrt(2/(πz)) sinh z holds for large z too
        let z = c(75.0, 3.0);
        let want = (z * PI).inv().scale(2.0).sqrt() * z.sinh();
        assert!(rel(bessel_i(c(0.5, 0.0), z).unwrap(), want) < 1e-13);
        let want = (2.0 / (PI * 3.0)).sqrt() * (3f64.cosh());
        assert!(rel(bessel_i(c(-0.5, 0.0), c(3.0, 0.0)).unwrap(), c(want, 0.0)) < 1e-14);
    }

    #[test]
    fn arbitrary_precision_values() {
        // mpmath.besseli at 40 digits
        let cases = [
            (c(1.3, 0.7), c(4.0, -1.0), c(4.012_576_761_372_186, -9.249_546_354_173_722)),
            (c(2.5, -3.0), c(45.0, 0.0), c(2.118_107_812_894_275_6e18, 3.605_464_490_118_917_5e17)),
            (c(11.7, -11.7), c(60.0, 0.0), c(-3.869_969_500_542_811_4e24, 4.327_001_002_006_544e24)),
        ];
        for (nu, z, want) in cases {
            let got = bessel_i(nu, z).unwrap();
            assert!(rel(got, want) < 1e-11, "I_{nu}({z}) = {got}, want {want}");
        }
        let scaled = bessel_i_scaled(c(0.25, 0.0), c(80.0, 0.0)).unwrap();
        assert!((scaled.re - 0.044_655_734_170_375_52).abs() < 1e-15);
    }

    #[test]
    fn integer_negative_order_symmetry() {
        let z = c(2.0, 0.5);
        let a = bessel_i(c(-3.0, 0.0), z).unwrap();
        let b = bessel_i(c(3.0, 0.0), z).unwrap();
        assert!(rel(a, b) < 1e-15);
    }

    #[test]
    fn negative_order_at_zero_is_pole() {
        assert!(bessel_i(c(-0.5, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn huge_argument_does_not_overflow_in_log_space() {
        let order = BesselOrder::new(c(3.2, -1.0)).unwrap();
        let v = order.ln_i_scaled(c(5000.0, 0.0)).unwrap();
        assert!(v.re.is_finite() && v.re < 0.0);
        assert!(matches!(bessel_i(c(3.2, 0.0), c(5000.0, 0.0)), Err(Error::Overflow { .. })));
    }

    /// Both regimes overlap above the switch radius; their agreement bounds
    /// the error of the expansion where it is actually selected.
    #[test]
    fn threshold_accuracy() {
        let mut worst: f64 = 0.0;
        for &nu in &[c(0.0, 0.0), c(1.0, 0.0), c(2.85, 0.0), c(1.8, -2.0), c(4.0, 3.0)] {
            let order = BesselOrder::new(nu).unwrap();
            for &r in &[31.0, 40.0, 60.0, 100.0, 200.0] {
                for &arg in &[0.0, 0.3] {
                    let z = Complex64::from_polar(r, arg);
                    if let Some(a) = order.ln_asymptotic(z) {
                        let s = order.ln_series(z).unwrap();
                        worst = worst.max(((a - s).exp() - 1.0).norm());
                    }
                }
            }
        }
        assert!(worst < 1e-12, "series/asymptotic overlap error {worst:e}");
    }

    proptest! {
        #[test]
        fn real_inputs_give_real_positive(nu in 0.0f64..20.0, z in 0.01f64..400.0) {
            let v = bessel_i_scaled(c(nu, 0.0), c(z, 0.0)).unwrap();
            prop_assert!(v.re > 0.0 || v.re == 0.0 && nu > 0.0);
            prop_assert!(v.im.abs() <= 1e-12 * v.re.abs());
        }

        #[test]
        fn scaled_matches_unscaled(nu_re in 0.0f64..6.0, nu_im in -4.0f64..4.0,
                                   z_re in 0.1f64..60.0, z_im in -5.0f64..5.0) {
            let nu = c(nu_re, nu_im);
            let z = c(z_re, z_im);
            let a = bessel_i(nu, z).unwrap() * (-z.re).exp();
            let b = bessel_i_scaled(nu, z).unwrap();
            prop_assert!(rel(a, b) < 1e-12);
        }

        #[test]
        fn three_term_recurrence(nu_re in 0.5f64..5.0, nu_im in -3.0f64..3.0,
                                 z_re in 0.5f64..50.0, z_im in -2.0f64..2.0) {
            // I_{ν-1}(z) - I_{ν+1}(z) = (2ν/z) I_ν(z)
            let nu = c(nu_re, nu_im);
            let z = c(z_re, z_im);
            let lhs = bessel_i_scaled(nu - 1.0, z).unwrap() - bessel_i_scaled(nu + 1.0, z).unwrap();
            let rhs = bessel_i_scaled(nu, z).unwrap() * nu * 2.0 / z;
            let scale = bessel_i_scaled(nu - 1.0, z).unwrap().norm();
            prop_assert!((lhs - rhs).norm() <= 1e-11 * scale);
        }
    }
}
