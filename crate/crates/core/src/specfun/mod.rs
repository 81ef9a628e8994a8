//! Complex-parameter special functions: ln Γ, modified Bessel I_ν and
//! Kummer's confluent hypergeometric M.
//!
//! Series are summed until two consecutive terms fall below
//! `SERIES_TOL × |partial sum|` while the term ratio is below one; hitting
//! `MAX_TERMS` is an error. Everything is evaluated in log space so that
//! values far outside the f64 range can still be combined.

mod bessel;
mod gamma;
mod kummer;

pub use bessel::{bessel_i, bessel_i_scaled, ln_bessel_i, BesselOrder, BESSEL_ASYMPTOTIC_THRESHOLD};
pub use gamma::log_gamma;
pub use kummer::{kummer_m, kummer_m_series, ln_kummer_m, Kummer, KUMMER_ASYMPTOTIC_THRESHOLD};

pub const SERIES_TOL: f64 = 1e-16;
pub const MAX_TERMS: usize = 10_000;
