use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use three_halves::commands::{self, Outcome};
use three_halves::config::{RunConfig, Sweep};
use three_halves::error::CliError;

#[derive(Parser)]
#[command(name = "three-halves", version, about = "Pricing engine for the 3/2 stochastic volatility model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Echo the parsed config and check parameter admissibility.
    Validate(Common),
    /// Price the configured product.
    Price(Common),
    /// Emit a density or characteristic-function grid.
    Grid(Common),
    /// Price with a Monte Carlo cross-check.
    McCompare(Common),
}

#[derive(Args)]
struct Common {
    /// Config file.
    #[arg(long)]
    config: String,
    /// CSV destination; defaults to `[output] path`, else stdout.
    #[arg(long)]
    out: Option<String>,
    /// Sweep a key over `start:end:count`; repeatable.
    #[arg(long = "sweep", value_name = "KEY=START:END:COUNT")]
    sweeps: Vec<String>,
    /// Add Monte Carlo columns to `price`.
    #[arg(long)]
    mc_check: bool,
    /// Override `[simulation] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (kind, common) = match cli.command {
        Command::Validate(c) => ("validate", c),
        Command::Price(c) => ("price", c),
        Command::Grid(c) => ("grid", c),
        Command::McCompare(c) => ("mc-compare", c),
    };
    let text = std::fs::read_to_string(&common.config)
        .map_err(|source| CliError::Io { path: common.config.clone(), source })?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg.simulation.seed = seed;
    }
    let sweeps = common.sweeps.iter().map(|s| Sweep::parse(s)).collect::<Result<Vec<_>, _>>()?;
    let outcome: Outcome = match kind {
        "validate" => commands::validate(&cfg)?,
        "price" => commands::price(&cfg, &sweeps, common.mc_check)?,
        "grid" => commands::grid(&cfg)?,
        _ => commands::mc_compare(&cfg, &sweeps)?,
    };
    let out_path = common.out.or(cfg.output.path.clone());
    match (&outcome.table, out_path) {
        (Some(table), Some(path)) => {
            table.write(&path)?;
            print!("{}", outcome.summary);
        }
        (Some(table), None) => {
            eprint!("{}", outcome.summary);
            std::io::stdout()
                .write_all(&table.to_csv())
                .map_err(|source| CliError::Io { path: "stdout".into(), source })?;
        }
        (None, _) => print!("{}", outcome.summary),
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
