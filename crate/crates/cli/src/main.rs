//! Sensor twin, calibration and flight simulation from the command line.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 model, 5 simulation fault,
//! 6 sensed load outside the sensor range during flight.

mod calibrate;
mod error;
mod fly;
mod generate;
mod output;
mod params;
mod thermal;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{exit, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "coinft",
    version,
    about = "Capacitive force/torque sensor twin, calibration and flight simulation"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "COINFT_OUT", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthetic calibration trials as CSV logs plus a manifest.
    Generate(generate::GenerateArgs),
    /// Fit calibration models and print the accuracy table.
    Calibrate(calibrate::CalibrateArgs),
    /// Metrics and predicted-vs-reference series of a model on a log.
    Evaluate(calibrate::EvaluateArgs),
    /// No-load temperature sweep, compensator fit and force-error traces.
    TempSweep(thermal::TempSweepArgs),
    /// Closed-loop contact flight.
    Fly(fly::FlyArgs),
    /// Derived sensor quantities or default configuration files.
    Params(params::ParamsArgs),
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => generate::run(a, &cli.out),
        Command::Calibrate(a) => calibrate::run_calibrate(a, &cli.out),
        Command::Evaluate(a) => calibrate::run_evaluate(a, &cli.out),
        Command::TempSweep(a) => thermal::run(a, &cli.out),
        Command::Fly(a) => fly::run(a, &cli.out),
        Command::Params(a) => params::run(a),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on malformed arguments
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("coinft: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
