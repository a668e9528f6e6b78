//! `kane-noise`: decay runs, budget reports and self-checks from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kane_noise::budget::DELTA_HEADLINE;
use kane_noise::DeviceParameters;
use serde_json::Value;

use crate::commands::{BudgetRequest, ValidateRequest};
use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "kane-noise", version, about = "Nuclear-spin qubit dephasing under A-gate voltage noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of trajectories.
    #[arg(long, value_name = "N")]
    traj: Option<usize>,
    /// Time step.
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            traj: self.traj,
            dt: self.dt,
        }
    }

    fn load(&self) -> Result<Option<RunConfig>, CliError> {
        let Some(path) = &self.config else {
            return Ok(None);
        };
        let mut cfg = RunConfig::load(path)?;
        cfg.apply(&self.overrides());
        Ok(Some(cfg))
    }

    fn require(&self) -> Result<RunConfig, CliError> {
        self.load()?
            .ok_or_else(|| CliError::Config("--config: this command needs a configuration file".into()))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Idle register qubit: Monte Carlo dephasing against the closed form.
    RegisterDecay(Common),
    /// Driven y-rotation: Monte Carlo against the exact and approximate solutions.
    Rotation(Common),
    /// Noise tolerance budget for a target fidelity loss.
    Budget {
        #[command(flatten)]
        common: Common,
        /// Target fidelity loss.
        #[arg(long, default_value_t = DELTA_HEADLINE)]
        delta: f64,
        /// Log-spaced sweep of the target from LO to HI.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        delta_range: Option<Vec<f64>>,
        /// Grid size of the sweep.
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// A-gate biases (V) to sweep, comma separated.
        #[arg(long, value_delimiter = ',', value_name = "V")]
        bias: Vec<f64>,
    },
    /// Consistency checks at desk scale; exit 1 if any fails.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn print(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json serializes"));
}

/// The config after flag overrides, beside the outputs it produced.
fn save_effective(cfg: &RunConfig) -> Result<(), CliError> {
    let mut text = cfg.to_json();
    text.push('\n');
    std::fs::write(cfg.output.dir.join("config.json"), text)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RegisterDecay(common) => {
            let cfg = common.require()?;
            let summary = commands::register_decay(&cfg.resolve()?)?;
            save_effective(&cfg)?;
            print(&summary);
        }
        Command::Rotation(common) => {
            let cfg = common.require()?;
            let summary = commands::rotation(&cfg.resolve()?)?;
            save_effective(&cfg)?;
            print(&summary);
        }
        Command::Budget {
            common,
            delta,
            delta_range,
            points,
            bias,
        } => {
            let device = match common.load()? {
                Some(cfg) => cfg.device_parameters()?,
                None => DeviceParameters::kane(),
            };
            let req = BudgetRequest {
                delta,
                delta_range: delta_range.map(|r| (r[0], r[1], points)),
                biases: bias,
                out: common.out.clone(),
            };
            print(&commands::budget(&device, &req)?);
        }
        Command::Validate { common, inject_fault } => {
            let mut req = ValidateRequest::desk();
            if let Some(cfg) = common.load()? {
                let r = cfg.resolve()?;
                req.device = r.device;
                req.noise = r.noise;
                req.seed = r.simulation.seed;
                req.n_traj = r.simulation.n_traj;
            }
            if let Some(seed) = common.seed {
                req.seed = seed;
            }
            if let Some(traj) = common.traj {
                req.n_traj = traj;
            }
            if inject_fault {
                req.analytic_kappa_scale = 1.1;
            }
            let report = commands::validate(&req)?;
            print(&report);
            if report["pass"] != Value::Bool(true) {
                return Err(CliError::Check("see report".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
