//! Trial logs, synthetic trial generation and train/test assembly.

mod log;
mod scenario;
mod sweep;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{tare, Baseline, CalibrationError, LabeledFrame};
use crate::sensor::SensorError;

pub use log::{format_log, load_log, parse_log, write_log, LOG_HEADER};
pub use scenario::{generate_trial, AxisRange, Scenario, WrenchRanges};
pub use sweep::{temperature_plateaus, temperature_ramp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: malformed header {found:?}")]
    MalformedHeader { line: u64, found: String },
    #[error("line {line}: expected {expected} columns, found {got}")]
    ColumnCount {
        line: u64,
        got: usize,
        expected: usize,
    },
    #[error("line {line}: timestamp {t} does not follow {prev}")]
    NonMonotonic { line: u64, prev: f64, t: f64 },
    #[error("line {line}: column {column} has invalid value {value:?}")]
    BadValue {
        line: u64,
        column: String,
        value: String,
    },
    #[error("need at least 2 trials, got {0}")]
    TooFewTrials(usize),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("sensor: {0}")]
    Sensor(#[from] SensorError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub scenario: String,
    pub seed: u64,
    pub sensor_hash: String,
}

/// One recorded trial at the CDC rate. Each sample carries its timestamp and
/// temperature inside the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub meta: TrialMeta,
    pub samples: Vec<LabeledFrame>,
}

impl Trial {
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.frame.timestamp - a.frame.timestamp,
            _ => 0.0,
        }
    }
}

/// How trials are divided into training and test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitProtocol {
    /// Last trial held out for testing, the rest used for training.
    #[default]
    LastTrial,
}

pub fn split(
    mut trials: Vec<Trial>,
    protocol: SplitProtocol,
) -> Result<(Vec<Trial>, Trial), DataError> {
    if trials.len() < 2 {
        return Err(DataError::TooFewTrials(trials.len()));
    }
    match protocol {
        SplitProtocol::LastTrial => {
            let test = trials.pop().expect("length checked");
            Ok((trials, test))
        }
    }
}

/// Pooled samples of `trials` and the tare over their no-load frames.
pub fn training_set(trials: &[Trial]) -> Result<(Vec<LabeledFrame>, Baseline), CalibrationError> {
    let samples: Vec<LabeledFrame> = trials
        .iter()
        .flat_map(|t| t.samples.iter().copied())
        .collect();
    let idle: Vec<_> = samples
        .iter()
        .filter(|s| s.is_no_load())
        .map(|s| s.frame)
        .collect();
    let baseline = tare(&idle)?;
    Ok((samples, baseline))
}

/// Writes via a sibling temporary file and a rename, so readers never see
/// a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    let io = |e: std::io::Error| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.partial"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(seed: u64) -> Trial {
        Trial {
            meta: TrialMeta {
                scenario: "t".into(),
                seed,
                sensor_hash: String::new(),
            },
            samples: vec![],
        }
    }

    #[test]
    fn eleven_trials() {
        let (train, test) = split((0..11).map(trial).collect(), SplitProtocol::LastTrial).unwrap();
        assert_eq!(train.len(), 10);
        assert_eq!(test.meta.seed, 10);
        assert!(train.iter().all(|t| t.meta.seed != 10));
    }

    #[test]
    fn two_trials() {
        let (train, _) = split(vec![trial(0), trial(1)], SplitProtocol::LastTrial).unwrap();
        assert_eq!(train.len(), 1);
    }

    #[test]
    fn one_trial_rejected() {
        assert_eq!(
            split(vec![trial(0)], SplitProtocol::LastTrial),
            Err(DataError::TooFewTrials(1))
        );
    }
}
