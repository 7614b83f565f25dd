//! Tare, quadratic feature expansion, least-squares calibration matrix,
//! accuracy metrics and temperature compensation.

mod features;
mod fit;
pub mod linalg;
mod metrics;
pub mod model_file;
mod thermal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensor::CapacitanceFrame;
use crate::types::Wrench;

pub use features::{expand_features, tare, tared_channels, Baseline, FeatureSet, FeatureVector};
pub use fit::{
    build_normal_equations, fit, optimality_ratio, CalibrationModel, FitOptions, NormalEquations,
    Ridge, AUTO_RIDGE_FACTOR,
};
pub use metrics::{evaluate, metrics_from_pairs, Metrics};
pub use thermal::{compensate, fit_temp_baseline, TempCompensator, MIN_SWEEP_SPAN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("insufficient data: {got} samples, need at least {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("ill-conditioned normal equations: {0}")]
    IllConditioned(String),
    #[error("model uses {model:?} channels but features are {features:?}")]
    ChannelMismatch {
        model: FeatureSet,
        features: FeatureSet,
    },
    #[error("need at least 3 distinct temperatures, got {0}")]
    TooFewTemperatures(usize),
    #[error("{0}")]
    InvalidOption(String),
    #[error("invalid calibration model: {0}")]
    InvalidModel(String),
}

/// A CDC frame with its reference wrench.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledFrame {
    pub frame: CapacitanceFrame,
    pub wrench: Wrench,
}

impl LabeledFrame {
    /// Frames whose reference wrench is exactly zero.
    pub fn is_no_load(&self) -> bool {
        self.wrench == Wrench::ZERO
    }
}
