use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use coinft::flight::{
    calibrate_for_flight, simulate, trace_csv, Mission, MissionSummary, Sensing, SensorStack,
    SimConfig,
};

use crate::calibrate::load_model;
use crate::error::{CliError, CliResult};
use crate::output::{load_sensor, read_text, Outputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum MissionArg {
    TrackSine,
    DeployPackage,
}

impl From<MissionArg> for Mission {
    fn from(m: MissionArg) -> Self {
        match m {
            MissionArg::TrackSine => Mission::TrackSine,
            MissionArg::DeployPackage => Mission::DeployPackage,
        }
    }
}

#[derive(Debug, Args)]
pub struct FlyArgs {
    #[arg(long, value_enum)]
    pub mission: MissionArg,
    /// Simulation TOML; mission defaults otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Feed the true load to the controller instead of the sensor reading.
    #[arg(long)]
    pub bypass_sensor: bool,
    /// Calibration model for the sensor loop; fitted on synthetic data
    /// when absent.
    #[arg(long, conflicts_with = "bypass_sensor")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub sensor: Option<PathBuf>,
    /// Trials for the built-in flight calibration.
    #[arg(long, default_value_t = 3)]
    pub calib_trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the simulated time limit [s].
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FlightReport<'a> {
    sensing: &'static str,
    seed: u64,
    rows: usize,
    saturated_steps: usize,
    #[serde(flatten)]
    summary: &'a MissionSummary,
}

pub fn run(args: &FlyArgs, out: &Path) -> CliResult<()> {
    let mission: Mission = args.mission.into();
    let mut cfg = match &args.config {
        Some(p) => SimConfig::from_toml(&read_text(p)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => SimConfig::for_mission(mission),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = args.duration {
        cfg.duration = d;
    }
    cfg.validate()?;

    let mut sensing = if args.bypass_sensor {
        Sensing::Bypass
    } else {
        if args.calib_trials < 2 && args.model.is_none() {
            return Err(CliError::Usage("--calib-trials must be at least 2".into()));
        }
        let params = load_sensor(args.sensor.as_deref())?;
        let calibration = match &args.model {
            Some(p) => load_model(p)?,
            None => calibrate_for_flight(&params, args.calib_trials, cfg.seed.wrapping_add(1000))?,
        };
        Sensing::Stack(Box::new(SensorStack::new(
            params,
            calibration,
            cfg.temperature,
            cfg.seed,
        )?))
    };
    let outcome = simulate(&cfg, mission, &mut sensing)?;

    let report = FlightReport {
        sensing: if args.bypass_sensor {
            "bypass"
        } else {
            "sensor"
        },
        seed: cfg.seed,
        rows: outcome.trace.len(),
        saturated_steps: outcome.saturated_steps,
        summary: &outcome.summary,
    };
    let json = serde_json::to_string_pretty(&report).expect("summary serializes") + "\n";
    let mut files = Outputs::default();
    files.add(
        format!("flight_{}.csv", mission.name()).into(),
        trace_csv(&outcome.trace),
    );
    files.add(format!("summary_{}.json", mission.name()).into(), json);
    files.commit(out)?;

    match &outcome.summary {
        MissionSummary::TrackSine(s) => println!(
            "track_sine: RMS error {:.4} N over {} HOLD ticks (true load {:.4} N), completed: {}",
            s.rms_error, s.hold_steps, s.rms_error_true, s.completed
        ),
        MissionSummary::DeployPackage(s) => println!(
            "deploy_package: hover {:.3} N, residuals {:?} N, detached at {:?} s, success: {}",
            s.hover_force, s.residuals, s.detached_at, s.success
        ),
    }
    Ok(())
}
