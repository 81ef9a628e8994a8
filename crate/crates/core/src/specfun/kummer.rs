use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use super::bessel::finite_exp;
use super::gamma::log_gamma;
use super::{MAX_TERMS, SERIES_TOL};
use crate::{Error, Result};

/// |z| above which the large-argument expansion is tried (after the Kummer
/// transformation has made Re z ≥ 0). Falls back to the series if the
/// expansion diverges before reaching full precision.
pub const KUMMER_ASYMPTOTIC_THRESHOLD: f64 = 30.0;

const RESCALE: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4;
/// ln of the relative size below which the recessive term is dropped.
const NEGLIGIBLE: f64 = -40.0;

fn is_nonpositive_integer(x: Complex64) -> bool {
    x.im == 0.0 && x.re <= 0.0 && x.re == x.re.round()
}

/// Parameters (a, b) of M(a, b, ·) with their Gamma factors cached.
#[derive(Debug, Clone, Copy)]
pub struct Kummer {
    a: Complex64,
    b: Complex64,
    ln_gamma_b: Complex64,
    /// `None` where Γ has a pole, i.e. 1/Γ = 0.
    ln_gamma_a: Option<Complex64>,
    ln_gamma_b_minus_a: Option<Complex64>,
}

impl Kummer {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if is_nonpositive_integer(b) {
            return Err(Error::Pole { function: "kummer_m", at: b });
        }
        let lg = |x: Complex64| -> Result<Option<Complex64>> {
            if is_nonpositive_integer(x) {
                Ok(None)
            } else {
                log_gamma(x).map(Some)
            }
        };
        Ok(Self { a, b, ln_gamma_b: log_gamma(b)?, ln_gamma_a: lg(a)?, ln_gamma_b_minus_a: lg(b - a)? })
    }

    /// ln M(a, b, z).
    pub fn ln_m(&self, z: Complex64) -> Result<Complex64> {
        if is_nonpositive_integer(self.a) {
            return ln_series(self.a, self.b, z);
        }
        if z.re < 0.0 {
            let bma = self.b - self.a;
            let inner = self.ln_m_right(bma, self.ln_gamma_b_minus_a, self.ln_gamma_a, -z)?;
            Ok(z + inner)
        } else {
            self.ln_m_right(self.a, self.ln_gamma_a, self.ln_gamma_b_minus_a, z)
        }
    }

    pub fn m(&self, z: Complex64) -> Result<Complex64> {
        finite_exp(self.ln_m(z)?, "kummer_m")
    }

    /// ln M(a, b, z) for Re z ≥ 0, with `a` possibly the transformed parameter.
    fn ln_m_right(
        &self,
        a: Complex64,
        lg_a: Option<Complex64>,
        lg_bma: Option<Complex64>,
        z: Complex64,
    ) -> Result<Complex64> {
        if let Some(lg_a) = lg_a.filter(|_| z.norm() > KUMMER_ASYMPTOTIC_THRESHOLD) {
            if let Some(v) = asymptotic(a, self.b, z, self.ln_gamma_b, lg_a, lg_bma) {
                return Ok(v);
            }
        }
        ln_series(a, self.b, z)
    }
}

/// M(a, b, z), applying the Kummer transformation when Re z < 0.
pub fn kummer_m(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    Kummer::new(a, b)?.m(z)
}

/// ln M(a, b, z).
pub fn ln_kummer_m(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    Kummer::new(a, b)?.ln_m(z)
}

/// The defining power series, summed as is (no transformation, no expansion).
///
/// Loses accuracy to cancellation when Re z is large and negative; exposed
/// for independent checks of the transformation identity.
pub fn kummer_m_series(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(b) {
        return Err(Error::Pole { function: "kummer_m", at: b });
    }
    finite_exp(ln_series(a, b, z)?, "kummer_m")
}

fn ln_series(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    let zn = z.norm();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut shift = 0.0;
    let mut small = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let num = a + kf;
        let den = (b + kf) * (kf + 1.0);
        term = term * num * z / den;
        sum += term;
        if sum.l1_norm() > RESCALE {
            term /= RESCALE;
            sum /= RESCALE;
            shift += LN_RESCALE;
        }
        let size = term.l1_norm();
        let decaying = num.norm() * zn < den.norm();
        if size == 0.0 || decaying && size <= SERIES_TOL * sum.l1_norm() {
            small += 1;
            if small >= 2 {
                return Ok(sum.ln() + shift);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence { function: "kummer_m", terms: MAX_TERMS })
}

/// Sum of `Π (p + j)(q + j) / ((j + 1) w)`; `None` if the terms start to grow
/// before reaching full precision.
fn asymptotic_sum(p: Complex64, q: Complex64, w: Complex64) -> Option<Complex64> {
    let inv = w.inv();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for s in 0..500 {
        let sf = s as f64;
        term = term * (p + sf) * (q + sf) * inv / (sf + 1.0);
        let size = term.l1_norm();
        if size == 0.0 {
            return Some(sum);
        }
        if size > prev {
            return None;
        }
        sum += term;
        if size <= SERIES_TOL * sum.l1_norm() {
            return Some(sum);
        }
        prev = size;
    }
    None
}

fn asymptotic(
    a: Complex64,
    b: Complex64,
    z: Complex64,
    lg_b: Complex64,
    lg_a: Complex64,
    lg_bma: Option<Complex64>,
) -> Option<Complex64> {
    let ln_z = z.ln();
    let dominant_pre = lg_b - lg_a + z + (a - b) * ln_z;
    let s1 = asymptotic_sum(1.0 - a, b - a, z)?;
    let dominant = dominant_pre + s1.ln();

    let Some(lg_bma) = lg_bma else {
        return Some(dominant);
    };
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let recessive_pre = lg_b - lg_bma + Complex64::i() * (PI * sign) * a - a * ln_z;
    if (recessive_pre - dominant).re < NEGLIGIBLE {
        return Some(dominant);
    }
    let s2 = asymptotic_sum(a, a - b + 1.0, -z)?;
    let recessive = recessive_pre + s2.ln();
    let (hi, lo) = if recessive.re > dominant.re { (recessive, dominant) } else { (dominant, recessive) };
    Some(hi + (1.0 + (lo - hi).exp()).ln())
}
