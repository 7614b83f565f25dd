use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use coinft::dataio::{format_log, generate_trial, Scenario};

use crate::error::{CliError, CliResult};
use crate::output::{load_sensor, pool, read_text, sha256_hex, Outputs};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    SmallRange,
    LargeRange,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in load scenario.
    #[arg(long, value_enum, default_value = "small-range")]
    pub preset: Preset,
    /// Sensor parameter TOML file (defaults otherwise).
    #[arg(long)]
    pub sensor: Option<PathBuf>,
    /// Number of trials, test trial included.
    #[arg(long, default_value_t = 11)]
    pub trials: usize,
    /// Base seed; trial k uses seed + k. Defaults to the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the trial duration [s].
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Serialize)]
struct ManifestEntry {
    file: String,
    seed: u64,
    rows: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    scenario: String,
    sensor_hash: String,
    base_seed: u64,
    trials: Vec<ManifestEntry>,
}

pub fn trial_file(k: usize) -> String {
    format!("trial_{k:03}.csv")
}

pub fn run(args: &GenerateArgs, out: &std::path::Path) -> CliResult<()> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let mut scenario = match &args.scenario {
        Some(p) => Scenario::from_toml(&read_text(p)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => match args.preset {
            Preset::SmallRange => Scenario::small_range(),
            Preset::LargeRange => Scenario::large_range(),
        },
    };
    if let Some(d) = args.duration {
        scenario.duration = d;
    }
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    let params = load_sensor(args.sensor.as_deref())?;
    scenario
        .validate(&params)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let seeds: Vec<u64> = (0..args.trials as u64)
        .map(|k| scenario.seed.wrapping_add(k))
        .collect();
    let logs = pool(args.jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let trial = generate_trial(&scenario, &params, s)?;
                Ok((
                    trial.samples.len(),
                    trial.meta.sensor_hash.clone(),
                    format_log(&trial),
                ))
            })
            .collect::<Result<Vec<_>, coinft::dataio::DataError>>()
    })?;

    let mut files = Outputs::default();
    let mut entries = Vec::with_capacity(logs.len());
    let sensor_hash = logs[0].1.clone();
    for (k, ((rows, _, text), seed)) in logs.into_iter().zip(&seeds).enumerate() {
        let name = trial_file(k);
        entries.push(ManifestEntry {
            file: name.clone(),
            seed: *seed,
            rows,
            sha256: sha256_hex(text.as_bytes()),
        });
        files.add(name.into(), text);
    }
    let manifest = Manifest {
        scenario: scenario.name.clone(),
        sensor_hash,
        base_seed: scenario.seed,
        trials: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    files.add("manifest.json".into(), json);
    files.add("scenario.toml".into(), scenario.to_toml());
    files.add("sensor.toml".into(), params.to_toml());
    files.commit(out)?;
    println!(
        "wrote {} trials of {} ({} s each) to {}",
        args.trials,
        scenario.name,
        scenario.duration,
        out.display()
    );
    Ok(())
}
