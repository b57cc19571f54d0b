//! `roughmv`: equilibrium strategies under rough volatility from a JSON
//! config. Precedence is built-in defaults, then the config file, then flags.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Output;
use crate::config::{Format, Overrides, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "roughmv", version, about = "Equilibrium mean-variance strategies under Volterra Heston volatility")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Myopic, hedge and total strategy coefficients per kernel.
    HedgeCurve(Common),
    /// Time after which the rougher of two kernels demands more stock, per risk aversion.
    Crossover(Common),
    /// Monte Carlo terminal wealth statistics, and optionally the paths.
    Simulate(Common),
    /// Consumption and investment under non-exponential discounting.
    Nonexp(Common),
    /// Strategy curve with all value-function coefficients.
    Strategy(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Grid resolution [config default: 250].
    #[arg(long)]
    steps_per_year: Option<usize>,
    /// Monte Carlo paths [config default: 5000].
    #[arg(long)]
    paths: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
            steps_per_year: self.steps_per_year,
            paths: self.paths,
        }
    }
}

type Handler = fn(&RunConfig, &mut Output) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, command): (&str, &Common, Handler) =
        match &cli.command {
            Command::HedgeCurve(c) => ("hedge-curve", c, commands::hedge_curve),
            Command::Crossover(c) => ("crossover", c, commands::crossover),
            Command::Simulate(c) => ("simulate", c, commands::simulate),
            Command::Nonexp(c) => ("nonexp", c, commands::nonexp),
            Command::Strategy(c) => ("strategy", c, commands::strategy),
        };
    let config = RunConfig::load(&common.config, &common.overrides())?;
    let mut out = Output::new(&config.output.directory)?;
    command(&config, &mut out)?;
    let files = out.finish(name, &config)?;
    println!("{name}: wrote {} files to {}", files.len(), config.output.directory.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
