//! `pwsmf`: command-line experiments on the piecewise-smooth mean field of
//! adapting neuron networks. Every subcommand writes CSV/JSON data into the
//! output directory and prints a short summary on stdout.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pwsmf::ModelParams;

#[derive(Parser, Debug)]
#[command(name = "pwsmf", version, about = "Piecewise-smooth mean-field experiments for adapting neuron networks")]
struct Cli {
    /// Parameter file (.toml or .json) or preset name (izhikevich, adex, quartic).
    #[arg(long, global = true, default_value = "izhikevich")]
    model: String,

    /// Override a parameter, e.g. `--set tau_w=2.6`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed for network initial conditions.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Integration tolerance for mean-field and cycle computations.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

/// Coupling and current overrides shared by most subcommands.
#[derive(Args, Debug, Clone, Copy)]
pub struct Point {
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long = "I", id = "current")]
    pub current: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spiking network plus reduced mean field from the same start.
    Simulate(commands::SimulateArgs),
    /// Integrate one mean-field system.
    Meanfield(commands::MeanfieldArgs),
    /// Equilibria and their stability over a (g, I) grid.
    Equilibria(commands::EquilibriaArgs),
    /// Closed-form saddle-node and Hopf curves in the (g, I) plane.
    Curves(commands::CurvesArgs),
    /// Full two-parameter diagram with codimension-two points.
    Diagram(commands::DiagramArgs),
    /// Boundary equilibrium bifurcation type and supporting data per g.
    BebScan(commands::BebScanArgs),
    /// Locate a stable or unstable limit cycle.
    LimitCycle(commands::LimitCycleArgs),
    /// Current at which a cycle grazes the switching manifold.
    Grazing(commands::GrazingArgs),
    /// Ascending and descending current ramps of a network.
    Hysteresis(commands::HysteresisArgs),
}

/// Values that are valid for clap but rejected by the command.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// `x` or `lo:hi:n` (inclusive, `n >= 1` points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let grid = match parts.as_slice() {
            [x] => {
                let x = parse(x)?;
                Grid { lo: x, hi: x, n: 1 }
            }
            [lo, hi, n] => Grid {
                lo: parse(lo)?,
                hi: parse(hi)?,
                n: n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?,
            },
            _ => return Err("expected `x` or `lo:hi:n`".into()),
        };
        if !(grid.lo.is_finite() && grid.hi.is_finite()) || grid.n == 0 || (grid.n > 1 && grid.hi < grid.lo) {
            return Err(format!("empty or invalid range {s:?}"));
        }
        Ok(grid)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SystemArg {
    Full,
    Reduced,
    Quiescent,
    Embedded,
}

/// Settings shared by every command.
pub struct Context {
    pub params: ModelParams,
    pub out: PathBuf,
    pub seed: u64,
    pub tol: f64,
}

fn load_model(name: &str, overrides: &[String]) -> Result<ModelParams> {
    let base = match ModelParams::preset(name) {
        Some(p) => p,
        None => {
            let path = PathBuf::from(name);
            if !path.exists() {
                return Err(config_error(format!(
                    "model {name:?} is neither a preset (izhikevich, adex, quartic) nor an existing file"
                )));
            }
            ModelParams::load(&path)?
        }
    };
    if overrides.is_empty() {
        return Ok(base);
    }
    let mut value = serde_json::to_value(&base)?;
    let table = value.as_object_mut().expect("parameters serialize to a table");
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| config_error(format!("override {o:?} is not KEY=VALUE")))?;
        let parsed = raw
            .parse::<f64>()
            .map(serde_json::Value::from)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_owned()));
        table.insert(key.trim().to_owned(), parsed);
    }
    Ok(ModelParams::from_json_str(&value.to_string())?)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    if !(cli.tol > 0.0) {
        return Err(config_error(format!("--tol must be > 0, got {}", cli.tol)));
    }
    let ctx = Context {
        params: load_model(&cli.model, &cli.overrides)?,
        out: cli.out,
        seed: cli.seed,
        tol: cli.tol,
    };
    match cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, &a),
        Command::Meanfield(a) => commands::meanfield(&ctx, &a),
        Command::Equilibria(a) => commands::equilibria(&ctx, &a),
        Command::Curves(a) => commands::curves(&ctx, &a),
        Command::Diagram(a) => commands::diagram(&ctx, &a),
        Command::BebScan(a) => commands::beb_scan(&ctx, &a),
        Command::LimitCycle(a) => commands::limit_cycle(&ctx, &a),
        Command::Grazing(a) => commands::grazing(&ctx, &a),
        Command::Hysteresis(a) => commands::hysteresis(&ctx, &a),
    }
}

fn is_config_error(e: &anyhow::Error) -> bool {
    use pwsmf::Error as E;
    e.chain().any(|cause| {
        cause.downcast_ref::<ConfigError>().is_some()
            || matches!(
                cause.downcast_ref::<E>(),
                Some(E::InvalidParams(_) | E::UnsupportedModel(_) | E::DomainError { .. } | E::NoHopfRegime { .. })
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
