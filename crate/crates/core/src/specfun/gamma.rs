use num_complex::Complex64;
use num_traits::Float;

use crate::{Error, Result};

/// `B_{2k} / (2k (2k - 1))` for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// |z| above which the Stirling series is used directly.
const STIRLING_RADIUS: f64 = 10.0;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Principal branch of ln Γ(z), analytic off the non-positive real axis.
///
/// Small arguments are shifted upward with `ln Γ(z) = ln Γ(z + n) - Σ ln(z + k)`
/// before the Stirling series is applied, which keeps the imaginary part on
/// the same branch as the standard `loggamma`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("log_gamma({z})")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole { function: "log_gamma", at: z });
    }

    let (shifted, correction) = if z.im.abs() >= STIRLING_RADIUS || z.re >= STIRLING_RADIUS {
        (z, Complex64::new(0.0, 0.0))
    } else {
        let n = (STIRLING_RADIUS - z.re).ceil() as usize;
        let mut corr = Complex64::new(0.0, 0.0);
        for k in 0..n {
            corr += (z + k as f64).ln();
        }
        (z + n as f64, corr)
    };

    let out = stirling(shifted) - correction;
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow { function: "log_gamma" })
    }
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + series
}
