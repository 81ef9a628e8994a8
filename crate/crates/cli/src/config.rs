//! Run configuration: sectioned `key = value` text parsed as TOML with
//! unknown keys rejected.
//!
//! ```text
//! [model]
//! kappa = 22.84
//! theta = 1.0
//! ...
//! [product.timer]
//! strike = 100
//! ```

use serde::{Deserialize, Serialize};

use three_halves_core::model::{JumpParams, ModelParams, ThetaCurve};
use three_halves_core::pricers::{EuropeanSpec, Lag, MomentSwapSpec, TimerOptionSpec, WeightKind};
use three_halves_core::quadrature::{EtaAxisKind, QuadratureConfig};

use crate::error::CliError;
use crate::mc::{Product, Scheme, SimulationConfig};

fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<JumpSection>,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub product: ProductSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kappa: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub r: f64,
    #[serde(default)]
    pub q: f64,
    pub s0: f64,
    pub v0: f64,
    /// Constant θ; alternatively `theta_breakpoints` and `theta_values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSection {
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaAxisName {
    Trapezoid,
    FourierSeries,
}

/// Overrides applied on top of the product's default quadrature settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_upper_mass_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourier_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourier_truncation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_axis: Option<EtaAxisName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_aliasing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
}

impl QuadratureSection {
    pub fn overlay(&self, base: QuadratureConfig) -> QuadratureConfig {
        QuadratureConfig {
            v_nodes: self.v_nodes.unwrap_or(base.v_nodes),
            v_upper_mass_tol: self.v_upper_mass_tol.unwrap_or(base.v_upper_mass_tol),
            fourier_nodes: self.fourier_nodes.unwrap_or(base.fourier_nodes),
            fourier_truncation: self.fourier_truncation.unwrap_or(base.fourier_truncation),
            damping_omega: self.damping_omega.unwrap_or(base.damping_omega),
            damping_eta: self.damping_eta.unwrap_or(base.damping_eta),
            eta_axis: match self.eta_axis {
                Some(EtaAxisName::Trapezoid) => EtaAxisKind::Trapezoid,
                Some(EtaAxisName::FourierSeries) => EtaAxisKind::FourierSeries,
                None => base.eta_axis,
            },
            series_aliasing: self.series_aliasing.unwrap_or(base.series_aliasing),
            series_terms: self.series_terms.unwrap_or(base.series_terms),
            series_order: self.series_order.unwrap_or(base.series_order),
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    ExactVarianceTransition,
    EulerFullTruncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub scheme: SchemeName,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimulationConfig::default();
        Self {
            n_paths: d.n_paths,
            steps_per_year: d.steps_per_year,
            seed: d.seed,
            scheme: SchemeName::ExactVarianceTransition,
        }
    }
}

impl SimulationSection {
    pub fn to_config(&self) -> SimulationConfig {
        SimulationConfig {
            n_paths: self.n_paths,
            steps_per_year: self.steps_per_year,
            seed: self.seed,
            scheme: match self.scheme {
                SchemeName::ExactVarianceTransition => Scheme::ExactVarianceTransition,
                SchemeName::EulerFullTruncation => Scheme::EulerFullTruncation,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    #[default]
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuropeanSection {
    pub strike: f64,
    pub maturity: f64,
    #[serde(default, rename = "type")]
    pub kind: OptionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimerSection {
    pub strike: f64,
    pub maturity: f64,
    pub n_monitoring: usize,
    pub budget: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightName {
    #[default]
    Constant,
    PriceRatio,
    Corridor,
    TerminalPrice,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagName {
    #[default]
    Current,
    Previous,
}

fn default_moment() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSection {
    pub maturity: f64,
    pub periods: usize,
    #[serde(default = "default_moment")]
    pub moment: u32,
    #[serde(default)]
    pub weight: WeightName,
    #[serde(default)]
    pub lag: LagName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub european: Option<EuropeanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timer: Option<TimerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap: Option<SwapSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Density,
    Cf,
    ConditionalCf,
}

/// Grid emission settings; axes are `"start:end:count"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub kind: GridKind,
    #[serde(default)]
    pub t: f64,
    pub delta: f64,
    /// Starting variance; defaults to `v0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// Density axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_prime: Option<String>,
    /// Terminal variance for the conditional CF; defaults to `v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Evenly spaced values `start..=end`, written `start:end:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let bad = || config_err(format!("axis `{text}` is not start:end:count"));
        let [a, b, n] = parts[..] else { return bad() };
        let (Ok(start), Ok(end), Ok(count)) = (a.parse::<f64>(), b.parse::<f64>(), n.parse::<usize>()) else {
            return bad();
        };
        if count == 0 || !start.is_finite() || !end.is_finite() {
            return bad();
        }
        Ok(Self { start, end, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| if k + 1 == self.count { self.end } else { self.start + step * k as f64 }).collect()
    }
}

/// A `--sweep KEY=start:end:count` request.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub axis: Axis,
}

impl Sweep {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let Some((key, axis)) = text.split_once('=') else {
            return config_err(format!("sweep `{text}` is not KEY=start:end:count"));
        };
        Ok(Self { key: key.trim().to_string(), axis: Axis::parse(axis)? })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Model parameters without the admissibility check.
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        let theta = match (m.theta, &m.theta_breakpoints, &m.theta_values) {
            (Some(v), None, None) => ThetaCurve::constant(v),
            (None, Some(b), Some(v)) => {
                ThetaCurve::piecewise(b.clone(), v.clone()).map_err(|e| CliError::Config(e.to_string()))?
            }
            _ => return config_err("[model] needs either `theta` or both `theta_breakpoints` and `theta_values`"),
        };
        Ok(ModelParams {
            kappa: m.kappa,
            epsilon: m.epsilon,
            rho: m.rho,
            r: m.r,
            q: m.q,
            s0: m.s0,
            v0: m.v0,
            theta,
            jumps: self.jumps.map(|j| JumpParams { lambda: j.lambda, mu: j.mu, sigma: j.sigma }),
        })
    }

    /// The single configured product.
    pub fn product(&self) -> Result<Product, CliError> {
        let p = &self.product;
        let n = p.european.is_some() as usize + p.timer.is_some() as usize + p.swap.is_some() as usize;
        if n != 1 {
            return config_err(format!("exactly one [product.*] section is required, found {n}"));
        }
        if let Some(e) = p.european {
            return Ok(Product::European(EuropeanSpec {
                strike: e.strike,
                maturity: e.maturity,
                is_call: e.kind == OptionKind::Call,
            }));
        }
        if let Some(t) = p.timer {
            return Ok(Product::Timer(TimerOptionSpec {
                strike: t.strike,
                maturity: t.maturity,
                n_monitoring: t.n_monitoring,
                budget: t.budget,
            }));
        }
        let s = p.swap.expect("one product present");
        let lag = match s.lag {
            LagName::Current => Lag::Current,
            LagName::Previous => Lag::Previous,
        };
        let weight = match s.weight {
            WeightName::Constant => WeightKind::Constant,
            WeightName::PriceRatio => WeightKind::PriceRatio(lag),
            WeightName::TerminalPrice => WeightKind::TerminalPrice,
            WeightName::Corridor => match (s.lower, s.upper) {
                (Some(lower), Some(upper)) => WeightKind::Corridor { lower, upper, lag },
                _ => return config_err("corridor weight needs `lower` and `upper`"),
            },
        };
        Ok(Product::Swap(MomentSwapSpec::uniform(s.maturity, s.periods, s.moment, weight)))
    }

    /// Quadrature settings for the configured product.
    pub fn quadrature(&self) -> QuadratureConfig {
        let base = if self.product.timer.is_some() { QuadratureConfig::timer() } else { QuadratureConfig::default() };
        self.quadrature.overlay(base)
    }

    /// Sets one numeric key. Product keys accept the short names
    /// `T`, `K`, `B` and `N`; model keys may be written `model.<name>`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), CliError> {
        let unknown = || config_err(format!("unknown sweep key `{key}`"));
        let count = |v: f64| -> Result<usize, CliError> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                config_err(format!("`{key}` needs a positive integer, got {v}"))
            }
        };
        let name = key.strip_prefix("product.").unwrap_or(key);
        let p = &mut self.product;
        let product_slot: Option<&mut f64> = match name {
            "T" | "maturity" => p
                .european
                .as_mut()
                .map(|e| &mut e.maturity)
                .or(p.timer.as_mut().map(|t| &mut t.maturity))
                .or(p.swap.as_mut().map(|s| &mut s.maturity)),
            "K" | "strike" => p.european.as_mut().map(|e| &mut e.strike).or(p.timer.as_mut().map(|t| &mut t.strike)),
            "B" | "budget" => p.timer.as_mut().map(|t| &mut t.budget),
            "lower" => p.swap.as_mut().and_then(|s| s.lower.as_mut()),
            "upper" => p.swap.as_mut().and_then(|s| s.upper.as_mut()),
            _ => None,
        };
        if let Some(slot) = product_slot {
            *slot = value;
            return Ok(());
        }
        match name {
            "N" | "n_monitoring" | "periods" => {
                if let Some(t) = p.timer.as_mut() {
                    t.n_monitoring = count(value)?;
                    return Ok(());
                }
                if let Some(s) = p.swap.as_mut() {
                    s.periods = count(value)?;
                    return Ok(());
                }
                return unknown();
            }
            _ => {}
        }
        let m = &mut self.model;
        let slot = match key.strip_prefix("model.").unwrap_or(key) {
            "kappa" => &mut m.kappa,
            "epsilon" => &mut m.epsilon,
            "rho" => &mut m.rho,
            "r" => &mut m.r,
            "q" => &mut m.q,
            "s0" => &mut m.s0,
            "v0" => &mut m.v0,
            "theta" if m.theta.is_some() => m.theta.as_mut().unwrap(),
            _ => return unknown(),
        };
        *slot = value;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EUROPEAN: &str = "
[model]
kappa = 22.84
theta = 1.0
epsilon = 8.56
rho = -0.99
r = 0.0
s0 = 100
v0 = 0.060025

[product.european]
strike = 100
maturity = 0.5
";

    #[test]
    fn parses_a_european_config() {
        let c = RunConfig::parse(EUROPEAN).unwrap();
        assert_eq!(c.model.s0, 100.0);
        assert!(matches!(c.product().unwrap(), Product::European(e) if e.is_call && e.strike == 100.0));
        assert_eq!(c.quadrature(), QuadratureConfig::default());
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn unknown_key_is_named_with_position() {
        let text = EUROPEAN.replace("rho = -0.99", "rho = -0.99\nrhoo = 1");
        let msg = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("rhoo") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn unknown_section_is_rejected() {
        let text = format!("{EUROPEAN}\n[extras]\nfoo = 1\n");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn needs_exactly_one_product() {
        let text = format!("{EUROPEAN}\n[product.timer]\nstrike = 1\nmaturity = 1\nn_monitoring = 2\nbudget = 0.1\n");
        assert!(RunConfig::parse(&text).unwrap().product().is_err());
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let a = Axis::parse("0.5:2:4").unwrap();
        assert_eq!(a.values(), vec![0.5, 1.0, 1.5, 2.0]);
        assert!(Axis::parse("1:2").is_err());
        assert!(Axis::parse("1:2:0").is_err());
    }

    #[test]
    fn sweep_keys_resolve() {
        let mut c = RunConfig::parse(EUROPEAN).unwrap();
        c.set("T", 2.0).unwrap();
        c.set("model.rho", -0.5).unwrap();
        c.set("epsilon", 4.0).unwrap();
        assert_eq!(c.product.european.unwrap().maturity, 2.0);
        assert_eq!((c.model.rho, c.model.epsilon), (-0.5, 4.0));
        assert!(c.set("B", 0.1).is_err());
        assert!(c.set("nonsense", 0.1).is_err());
    }

    proptest::proptest! {
        #[test]
        fn axis_is_monotone_with_exact_ends(start in -100.0f64..100.0, len in 0.001f64..100.0, count in 2usize..500) {
            let a = Axis::parse(&format!("{start}:{}:{count}", start + len)).unwrap();
            let v = a.values();
            proptest::prop_assert_eq!(v.len(), count);
            proptest::prop_assert_eq!(v[0], a.start);
            proptest::prop_assert_eq!(v[count - 1], a.end);
            proptest::prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
        }

        #[test]
        fn echoed_config_parses_back(kappa in 0.1f64..50.0, rho in -1.0f64..1.0, v0 in 1e-4f64..1.0) {
            let mut c = RunConfig::parse(EUROPEAN).unwrap();
            c.model.kappa = kappa;
            c.model.rho = rho;
            c.model.v0 = v0;
            proptest::prop_assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        }
    }
}
