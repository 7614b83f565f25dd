use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use coinft::calibration::{fit, fit_temp_baseline, CalibrationModel, FeatureSet, FitOptions};
use coinft::dataio::{
    generate_trial, temperature_plateaus, temperature_ramp, training_set, Scenario,
};
use coinft::sensor::{DriftModel, SensorParams, CHANNEL_NAMES};

use crate::calibrate::load_model;
use crate::error::{CliError, CliResult};
use crate::output::{load_sensor, opt_float, pool, Outputs};

#[derive(Debug, Clone, PartialEq)]
pub enum DriftChoice {
    /// Drift model of the sensor parameters.
    Sensor,
    None,
    /// Uniform linear drift, fraction per 10 °C.
    Linear(f64),
}

fn parse_drift(s: &str) -> Result<DriftChoice, String> {
    match s {
        "default" | "sensor" => Ok(DriftChoice::Sensor),
        "none" => Ok(DriftChoice::None),
        _ => match s.strip_prefix("linear:").map(str::parse::<f64>) {
            Some(Ok(f)) if f.is_finite() => Ok(DriftChoice::Linear(f)),
            _ => Err(format!(
                "expected `default`, `none` or `linear:<fraction per 10 °C>`, got {s:?}"
            )),
        },
    }
}

#[derive(Debug, Args)]
pub struct TempSweepArgs {
    #[arg(long)]
    pub sensor: Option<PathBuf>,
    /// `default`, `none` or `linear:<fraction per 10 °C>`.
    #[arg(long, default_value = "default", value_parser = parse_drift)]
    pub drift: DriftChoice,
    /// [°C]
    #[arg(long, default_value_t = 25.0)]
    pub t_start: f64,
    /// [°C]
    #[arg(long, default_value_t = 35.0)]
    pub t_end: f64,
    /// Number of temperature plateaus in the fitting sweep.
    #[arg(long, default_value_t = 11)]
    pub plateaus: usize,
    /// Frames per plateau.
    #[arg(long, default_value_t = 3600)]
    pub frames: usize,
    /// Length of the check ramp [s].
    #[arg(long, default_value_t = 60.0)]
    pub ramp_seconds: f64,
    /// Calibration model for the force traces; fitted at the reference
    /// temperature when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Full-mode model from three drift-free small-range trials.
fn reference_model(params: &SensorParams, seed: u64, jobs: usize) -> CliResult<CalibrationModel> {
    let mut sc = Scenario::small_range();
    sc.temperature = params.drift.reference_temp;
    let trials = pool(jobs)?.install(|| {
        (0..3u64)
            .into_par_iter()
            .map(|k| generate_trial(&sc, params, seed.wrapping_add(100 + k)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let (samples, baseline) = training_set(&trials)?;
    Ok(fit(
        &samples,
        &baseline,
        FeatureSet::Full,
        &FitOptions::default(),
    )?)
}

pub fn run(args: &TempSweepArgs, out: &Path) -> CliResult<()> {
    if args.plateaus < 3 || args.frames == 0 {
        return Err(CliError::Usage(
            "need at least 3 plateaus of at least 1 frame".into(),
        ));
    }
    if !(args.t_end > args.t_start) || !(args.ramp_seconds > 0.0) {
        return Err(CliError::Usage(
            "need t_end > t_start and a positive ramp".into(),
        ));
    }
    let mut params = load_sensor(args.sensor.as_deref())?;
    let t0 = params.drift.reference_temp;
    match args.drift {
        DriftChoice::Sensor => {}
        DriftChoice::None => params.drift = DriftModel::none(t0),
        DriftChoice::Linear(f) => params.drift = DriftModel::uniform_linear(t0, f),
    }
    let model = match &args.model {
        Some(p) => load_model(p)?,
        None => reference_model(&params, args.seed, args.jobs)?,
    };

    let step = (args.t_end - args.t_start) / (args.plateaus - 1) as f64;
    let temps: Vec<f64> = (0..args.plateaus)
        .map(|i| args.t_start + step * i as f64)
        .collect();
    let sweep = temperature_plateaus(&params, &temps, args.frames, args.seed)?;
    let comp = fit_temp_baseline(&sweep, t0)?;

    let ramp = temperature_ramp(
        &params,
        args.t_start,
        args.t_end,
        args.ramp_seconds,
        args.seed.wrapping_add(1),
    )?;
    let raw = CalibrationModel {
        compensator: None,
        ..model.clone()
    };
    let compensated = CalibrationModel {
        compensator: Some(comp.clone()),
        ..model
    };
    let mut ablation = String::from("t,temperature,force_uncompensated,force_compensated\n");
    let (mut worst_raw, mut worst_comp) = (0.0f64, 0.0f64);
    for f in &ramp {
        let a = raw.predict(f).force().norm();
        let b = compensated.predict(f).force().norm();
        worst_raw = worst_raw.max(a);
        worst_comp = worst_comp.max(b);
        let _ = writeln!(ablation, "{},{},{a},{b}", f.timestamp, f.temperature);
    }

    let mut fitcsv = String::from("channel,a0,a1,a2,r2,residual_std\n");
    for (k, name) in CHANNEL_NAMES.iter().enumerate() {
        let [a0, a1, a2] = comp.coeffs[k];
        let _ = writeln!(
            fitcsv,
            "{name},{a0},{a1},{a2},{},{}",
            opt_float(comp.r2[k]),
            comp.residual_std[k]
        );
    }
    let mut files = Outputs::default();
    files.add(
        "compensator.json".into(),
        serde_json::to_string_pretty(&comp).expect("compensator serializes") + "\n",
    );
    files.add("temp_fit.csv".into(), fitcsv);
    files.add("temp_ablation.csv".into(), ablation);
    files.commit(out)?;
    println!(
        "sweep {}–{} °C: min channel R² {}, max no-load |F| {:.3} N raw, {:.3} N compensated",
        args.t_start,
        args.t_end,
        opt_float(comp.min_r2()),
        worst_raw,
        worst_comp
    );
    Ok(())
}
