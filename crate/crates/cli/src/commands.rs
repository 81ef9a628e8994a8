//! The `validate`, `price`, `grid` and `mc-compare` commands.

use std::time::Instant;

use num_complex::Complex64;

use three_halves_core::model::ModelParams;
use three_halves_core::pricers::{fair_strike, price_european, price_timer_call, WeightKind};
use three_halves_core::quadrature::{integrate_semi_infinite_around, QuadratureConfig};
use three_halves_core::transforms::{
    conditional_cf_integrated_variance, joint_cf_h, log_spread, transition_density_v, TransformPoint,
};

use crate::config::{Axis, GridKind, RunConfig, Sweep};
use crate::error::{exit, CliError, Context};
use crate::mc::{mc_price, McReport, Product};
use crate::output::{Cell, Table};

/// Result of a command: human-readable summary, optional CSV, exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub table: Option<Table>,
    pub code: i32,
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let mut summary = cfg.to_text();
    let mut violations: Vec<String> = match params.validate() {
        Ok(()) => Vec::new(),
        Err(v) => v.0.iter().map(|x| x.to_string()).collect(),
    };
    if cfg.product.european.is_some() || cfg.product.timer.is_some() || cfg.product.swap.is_some() {
        if let Err(e) = cfg.product()?.validate() {
            violations.push(e.to_string());
        }
    }
    if let Err(e) = cfg.simulation.to_config().validate() {
        violations.push(e.to_string());
    }
    if violations.is_empty() {
        summary.push_str("\nadmissible\n");
        Ok(Outcome { summary, table: None, code: exit::OK })
    } else {
        summary.push_str("\ninadmissible\n");
        for v in &violations {
            summary.push_str(&format!("  violation: {v}\n"));
        }
        Ok(Outcome { summary, table: None, code: exit::CONSTRAINT })
    }
}

const PRICE_HEADER: [&str; 21] = [
    "product",
    "variant",
    "kappa",
    "epsilon",
    "rho",
    "v0",
    "strike",
    "maturity",
    "budget",
    "periods",
    "moment",
    "value",
    "err_estimate",
    "truncation_warning",
    "mc_mean",
    "mc_std_error",
    "mc_z",
    "mc_within_3se",
    "mc_discrete_mean",
    "mc_discrete_std_error",
    "n_paths",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analytic {
    pub value: f64,
    pub err_estimate: f64,
    pub truncation_warning: bool,
}

/// Analytic price or fair strike of `product`.
pub fn analytic(product: &Product, params: &ModelParams, quad: &QuadratureConfig) -> Result<Analytic, CliError> {
    match product {
        Product::European(e) => {
            let p = price_european(e, params, quad).in_module("pricers::european")?;
            Ok(Analytic { value: p.value, err_estimate: p.err_estimate, truncation_warning: p.truncation_warning })
        }
        Product::Timer(t) => {
            let p = price_timer_call(t, params, quad).in_module("pricers::timer")?.price;
            Ok(Analytic { value: p.value, err_estimate: p.err_estimate, truncation_warning: p.truncation_warning })
        }
        Product::Swap(s) => {
            let r = fair_strike(s, params, quad).in_module("pricers::swaps")?;
            Ok(Analytic { value: r.strike, err_estimate: r.err_estimate, truncation_warning: false })
        }
    }
}

fn describe(product: &Product) -> (&'static str, String, Cell, Cell, Cell, Cell, Cell) {
    let none = || Cell::Empty;
    match product {
        Product::European(e) => (
            "european",
            if e.is_call { "call" } else { "put" }.to_string(),
            e.strike.into(),
            e.maturity.into(),
            none(),
            none(),
            none(),
        ),
        Product::Timer(t) => (
            "timer",
            "call".to_string(),
            t.strike.into(),
            t.maturity.into(),
            t.budget.into(),
            Cell::Int(t.n_monitoring as u64),
            none(),
        ),
        Product::Swap(s) => {
            let variant = match s.weight {
                WeightKind::Constant => "constant".to_string(),
                WeightKind::PriceRatio(lag) => format!("price_ratio_{lag:?}").to_lowercase(),
                WeightKind::Corridor { lower, upper, lag } => {
                    format!("corridor_{lag:?}_{lower:?}_{upper:?}").to_lowercase()
                }
                WeightKind::TerminalPrice => "terminal_price".to_string(),
            };
            (
                "swap",
                variant,
                none(),
                s.maturity().into(),
                none(),
                Cell::Int(s.periods() as u64),
                Cell::Int(s.moment as u64),
            )
        }
    }
}

/// Every combination of the sweep values, first sweep outermost.
fn expand(cfg: &RunConfig, sweeps: &[Sweep]) -> Result<Vec<RunConfig>, CliError> {
    let mut out = vec![cfg.clone()];
    for s in sweeps {
        let mut next = Vec::with_capacity(out.len() * s.axis.count);
        for base in &out {
            for v in s.axis.values() {
                let mut c = base.clone();
                c.set(&s.key, v)?;
                next.push(c);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Prices the configured product at every sweep point, optionally with a
/// Monte Carlo cross-check.
pub fn price(cfg: &RunConfig, sweeps: &[Sweep], mc_check: bool) -> Result<Outcome, CliError> {
    let mut table = Table::new(&PRICE_HEADER);
    let sim = cfg.simulation.to_config();
    if mc_check {
        sim.validate().in_module("mc_oracle")?;
        table.comments.push(format!("seed={}", sim.seed));
    }
    let mut summary = String::new();
    for point in expand(cfg, sweeps)? {
        let params = point.params()?;
        params.ensure_valid().in_module("model")?;
        let product = point.product()?;
        let quad = point.quadrature();
        let started = Instant::now();
        let a = analytic(&product, &params, &quad)?;
        let analytic_time = started.elapsed().as_secs_f64();
        let mc: Option<McReport> =
            if mc_check { Some(mc_price(&product, &params, &sim).in_module("mc_oracle")?) } else { None };
        let wall = started.elapsed().as_secs_f64();

        let (name, variant, strike, maturity, budget, periods, moment) = describe(&product);
        let fields: Vec<String> = [("K", &strike), ("T", &maturity), ("B", &budget), ("N", &periods), ("m", &moment)]
            .iter()
            .filter(|(_, c)| **c != Cell::Empty)
            .map(|(k, c)| format!("{k}={}", c.render()))
            .collect();
        summary.push_str(&format!(
            "{name} {variant} {}: value {:?} ± {:.3e}{} (analytic {analytic_time:.2}s",
            fields.join(" "),
            a.value,
            a.err_estimate,
            if a.truncation_warning { " [truncation warning]" } else { "" },
        ));
        if let Some(m) = &mc {
            summary.push_str(&format!(
                ", total {wall:.2}s); mc {:?} ± {:.3e} (z = {:.2})",
                m.estimate.mean,
                m.estimate.std_error,
                m.estimate.z_score(a.value)
            ));
            if let Some(d) = &m.discrete_monitoring {
                summary.push_str(&format!("; discrete monitoring {:?} ± {:.3e}", d.mean, d.std_error));
            }
            summary.push('\n');
        } else {
            summary.push_str(")\n");
        }

        let mc_cells = match &mc {
            Some(m) => {
                let z = m.estimate.z_score(a.value);
                let d = m.discrete_monitoring;
                vec![
                    m.estimate.mean.into(),
                    m.estimate.std_error.into(),
                    z.into(),
                    Cell::Bool(z <= 3.0),
                    d.map(|d| d.mean).into(),
                    d.map(|d| d.std_error).into(),
                    Cell::Int(m.estimate.n_paths as u64),
                ]
            }
            None => vec![Cell::Empty; 7],
        };
        let mut row = vec![
            Cell::Text(name.to_string()),
            Cell::Text(variant),
            params.kappa.into(),
            params.epsilon.into(),
            params.rho.into(),
            params.v0.into(),
            strike,
            maturity,
            budget,
            periods,
            moment,
            a.value.into(),
            a.err_estimate.into(),
            Cell::Bool(a.truncation_warning),
        ];
        row.extend(mc_cells);
        table.push(row);
    }
    Ok(Outcome { summary, table: Some(table), code: exit::OK })
}

/// `price` with the Monte Carlo cross-check always on; exits 3 when any
/// point misses the 3 SE bracket.
pub fn mc_compare(cfg: &RunConfig, sweeps: &[Sweep]) -> Result<Outcome, CliError> {
    let mut out = price(cfg, sweeps, true)?;
    let table = out.table.as_ref().expect("price emits a table");
    let col = table.column("mc_within_3se").expect("column present");
    let misses = table.rows.iter().filter(|r| r[col] == Cell::Bool(false)).count();
    out.summary.push_str(&format!("{} of {} points within 3 SE\n", table.rows.len() - misses, table.rows.len()));
    if misses > 0 {
        out.code = exit::NUMERIC;
    }
    Ok(out)
}

fn axis(text: Option<&str>, name: &str, default: Option<&str>) -> Result<Axis, CliError> {
    match text.or(default) {
        Some(t) => Axis::parse(t),
        None => Err(CliError::Config(format!("[grid] needs `{name}` for this kind"))),
    }
}

/// Density, joint CF or conditional CF of integrated variance on a grid.
pub fn grid(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Some(g) = &cfg.grid else {
        return Err(CliError::Config("missing [grid] section".into()));
    };
    let params = cfg.params()?;
    params.ensure_valid().in_module("model")?;
    let v = g.v.unwrap_or(params.v0);
    let (t, t_end) = (g.t, g.t + g.delta);
    let mut summary = String::new();
    let table = match g.kind {
        GridKind::Density => {
            let quad = cfg.quadrature();
            let norm = integrate_semi_infinite_around(
                |vp| transition_density_v(t, v, t_end, vp, &params).map(|d| Complex64::new(d, 0.0)),
                v,
                log_spread(&params, v, g.delta),
                &quad,
            )
            .in_module("transforms")?
            .value
            .re;
            summary.push_str(&format!("density from v = {v:?} over [{t:?}, {t_end:?}]: normalization {norm:?}\n"));
            let mut table = Table::new(&["v_prime", "density", "normalization"]);
            for vp in axis(g.v_prime.as_deref(), "v_prime", None)?.values() {
                let d = transition_density_v(t, v, t_end, vp, &params).in_module("transforms")?;
                table.push(vec![vp.into(), d.into(), norm.into()]);
            }
            table
        }
        GridKind::Cf => {
            let mut table = Table::new(&["omega", "eta", "re", "im", "abs", "abs_le_1"]);
            let etas = axis(g.eta.as_deref(), "eta", Some("0:0:1"))?.values();
            for w in axis(g.omega.as_deref(), "omega", None)?.values() {
                for &e in &etas {
                    let h = joint_cf_h(t, v, t_end, TransformPoint::real(w, e), &params).in_module("transforms")?;
                    let m = h.norm();
                    table.push(vec![
                        w.into(),
                        e.into(),
                        h.re.into(),
                        h.im.into(),
                        m.into(),
                        Cell::Bool(m <= 1.0 + 1e-12),
                    ]);
                }
            }
            summary.push_str(&format!("joint CF on {} points\n", table.rows.len()));
            table
        }
        GridKind::ConditionalCf => {
            let v_end = g.v_end.unwrap_or(v);
            let mut table = Table::new(&["xi", "re", "im", "abs"]);
            for xi in axis(g.xi.as_deref(), "xi", None)?.values() {
                let c = conditional_cf_integrated_variance(Complex64::new(xi, 0.0), t, t_end, v, v_end, &params)
                    .in_module("transforms")?;
                table.push(vec![xi.into(), c.re.into(), c.im.into(), c.norm().into()]);
            }
            summary.push_str(&format!("conditional CF on {} points\n", table.rows.len()));
            table
        }
    };
    Ok(Outcome { summary, table: Some(table), code: exit::OK })
}
