use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::model::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{function}: pole at {at}")]
    Pole { function: &'static str, at: Complex64 },

    #[error("{function}: result overflows f64")]
    Overflow { function: &'static str },

    #[error("{function}: no convergence within {terms} terms")]
    NonConvergence { function: &'static str, terms: usize },

    #[error("interval [{t}, {t_prime}] outside the theta curve domain [0, {horizon}]")]
    Domain { t: f64, t_prime: f64, horizon: f64 },

    #[error("interval length {delta} is in the Dirac (terminal) regime")]
    DeltaRegime { delta: f64 },

    #[error("contour violation: {0}")]
    Contour(String),

    #[error("quadrature did not converge: value {value}, error estimate {achieved}")]
    Quadrature { value: Complex64, achieved: f64 },

    #[error("integrand failed at node {node}: {source}")]
    Integrand {
        node: f64,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("finite-difference derivative unstable: levels disagree by {disagreement:e} (relative)")]
    Derivative { disagreement: f64 },

    #[error("imaginary residual {imag:e} too large for real result {real}")]
    ImaginaryResidual { real: f64, imag: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(Violations),
}

impl Error {
    pub(crate) fn at_node(self, node: f64) -> Error {
        match self {
            e @ Error::Integrand { .. } => e,
            e => Error::Integrand { node, source: alloc::boxed::Box::new(e) },
        }
    }

    /// True for errors caused by a numerical method failing rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Overflow { .. }
            | Error::NonConvergence { .. }
            | Error::Quadrature { .. }
            | Error::Derivative { .. }
            | Error::ImaginaryResidual { .. } => true,
            Error::Integrand { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

/// Non-empty list of parameter constraint violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
