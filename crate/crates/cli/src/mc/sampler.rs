use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};

use three_halves_core::model::ModelParams;
use three_halves_core::transforms::interval_coefficients;
use three_halves_core::{Error, Result};

/// Exact transition sampler for `U = 1/V`.
///
/// Over an interval with coefficients `A = exp(∫θ)` and `C`, the law of
/// `Y = 2A U'/C` given `U = u` is noncentral chi-square with
/// `4(1 + κ/ε²)` degrees of freedom and noncentrality `2u/C`.
#[derive(Debug, Clone)]
pub struct VarianceSampler {
    dof: f64,
    /// χ²(dof - 1), used when dof > 1.
    central_tail: Option<ChiSquared<f64>>,
}

impl VarianceSampler {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.ensure_valid()?;
        let dof = 4.0 * (1.0 + params.kappa_over_eps2());
        if !(dof.is_finite() && dof > 0.0) {
            return Err(Error::InvalidArgument(format!("degrees of freedom {dof} out of range")));
        }
        let central_tail = if dof > 1.0 {
            Some(ChiSquared::new(dof - 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { dof, central_tail })
    }

    pub fn degrees_of_freedom(&self) -> f64 {
        self.dof
    }

    /// Draws `Y ~ χ'²(dof, lambda)`.
    pub fn noncentral_chi2<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> f64 {
        match &self.central_tail {
            Some(tail) => {
                let z: f64 = rng.sample(StandardNormal);
                let shifted = z + lambda.sqrt();
                shifted * shifted + tail.sample(rng)
            }
            None => {
                // Poisson mixture of central chi-squares
                let n =
                    if lambda > 0.0 { Poisson::new(0.5 * lambda).map(|p| p.sample(rng)).unwrap_or(0.0) } else { 0.0 };
                ChiSquared::new(self.dof + 2.0 * n).map(|c| c.sample(rng)).unwrap_or(0.0)
            }
        }
    }

    /// Draws `U'` given `U = u` over an interval with growth `A` and scale `C`.
    pub fn sample_u<R: Rng + ?Sized>(&self, u: f64, growth: f64, scale: f64, rng: &mut R) -> f64 {
        let y = self.noncentral_chi2(2.0 * u / scale, rng);
        scale * y / (2.0 * growth)
    }
}

/// Draws `U_{t+dt}` given `U_t = u`.
pub fn sample_variance_transition<R: Rng + ?Sized>(
    u: f64,
    t: f64,
    dt: f64,
    params: &ModelParams,
    rng: &mut R,
) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::InvalidArgument(format!("u must be positive, got {u}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let iv = interval_coefficients(params, t, t + dt)?;
    Ok(VarianceSampler::new(params)?.sample_u(u, iv.growth, iv.scale, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn short_step_concentrates_at_start() {
        let params = ModelParams::reference_sp500();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = 1.0 / params.v0;
        let n = 20_000;
        let mean = (0..n).map(|_| sample_variance_transition(u, 0.0, 1e-4, &params, &mut rng).unwrap()).sum::<f64>()
            / n as f64;
        assert!((mean / u - 1.0).abs() < 0.01, "{mean} vs {u}");
    }

    #[test]
    fn small_vol_of_vol_follows_the_ode() {
        // dU = (κ + ε² - θU) dt when ε → 0, so U' ≈ u e^{-θΔ} + κ(1 - e^{-θΔ})/θ
        let mut params = ModelParams::reference_sp500();
        params.epsilon = 0.05;
        let theta = params.theta.value_at(0.0);
        let (u, dt) = (1.0 / params.v0, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 2_000;
        let mean =
            (0..n).map(|_| sample_variance_transition(u, 0.0, dt, &params, &mut rng).unwrap()).sum::<f64>() / n as f64;
        let decay = (-theta * dt).exp();
        let eps2 = params.epsilon * params.epsilon;
        let ode = u * decay + (params.kappa + eps2) * (1.0 - decay) / theta;
        assert!((mean / ode - 1.0).abs() < 0.01, "{mean} vs {ode}");
    }

    #[test]
    fn small_dof_uses_poisson_mixture() {
        // κ/ε² = -0.875 gives dof 0.5, below one
        let mut params = ModelParams::reference_sp500();
        params.epsilon = 2.0;
        params.rho = -0.99;
        params.kappa = -3.5;
        assert!(params.ensure_valid().is_ok());
        let s = VarianceSampler::new(&params).unwrap();
        assert!(s.degrees_of_freedom() < 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (dof, lambda) = (s.degrees_of_freedom(), 1.7);
        let n = 200_000;
        let mean = (0..n).map(|_| s.noncentral_chi2(lambda, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - (dof + lambda)).abs() < 0.02 * (dof + lambda), "{mean}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = ModelParams::reference_sp500();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_variance_transition(0.0, 0.0, 0.1, &params, &mut rng).is_err());
        assert!(sample_variance_transition(1.0, 0.0, 0.0, &params, &mut rng).is_err());
    }
}
