//! Transform-based pricing for the 3/2 stochastic volatility model.
//!
//! The model is
//!
//! ```text
//! dS/S = (r - q) dt + sqrt(V) (rho dW1 + sqrt(1 - rho^2) dW2)
//! dV   = V (theta_t - kappa V) dt + epsilon V^{3/2} dW1
//! ```
//!
//! with an optional compound Poisson jump component in the log-price.
//! The crate evaluates the closed-form partial transform of the triple
//! (log-price, quadratic variation, variance), derived characteristic
//! functions and densities, and prices European options, discrete timer
//! options and weighted moment swaps by numerical Fourier inversion.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// inherent float methods shadow `Float` whenever num-traits gets its std
// feature, in tests or through feature unification with std dependents
#![allow(unused_imports)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod model;
pub mod pricers;
pub mod quadrature;
pub mod specfun;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
