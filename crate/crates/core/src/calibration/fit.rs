//! Least-squares calibration matrix: `(X Xᵀ + λI) Aᵀ = X Yᵀ`.

use serde::{Deserialize, Serialize};

use super::features::{frame_counts, tared_channels, Baseline, FeatureSet, FeatureVector};
use super::linalg::{solve_spd, SquareMatrix};
use super::thermal::TempCompensator;
use super::{CalibrationError, LabeledFrame};
use crate::sensor::CapacitanceFrame;
use crate::types::Wrench;

/// Ridge term of the normal equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ridge {
    /// `1e-9 · trace(X Xᵀ) / n_features`.
    Auto,
    /// Explicit λ; `Fixed(0.0)` is the plain normal equation.
    Fixed(f64),
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::Auto
    }
}

pub const AUTO_RIDGE_FACTOR: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    pub ridge: Ridge,
    /// Applied to every frame before tare and feature expansion.
    pub compensator: Option<TempCompensator>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub feature_set: FeatureSet,
    /// 6 rows (Fx, Fy, Fz, Mx, My, Mz) × n_features.
    pub matrix: Vec<Vec<f64>>,
    pub baseline: Baseline,
    /// λ actually used.
    pub ridge: f64,
    pub n_train: usize,
    /// Per-axis RMSE on the training set.
    pub training_rmse: [f64; 6],
    #[serde(default)]
    pub compensator: Option<TempCompensator>,
}

/// Accumulated `X Xᵀ` and `X Yᵀ`.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    pub gram: SquareMatrix,
    /// n_features × 6, row-major.
    pub cross: Vec<f64>,
    pub n_samples: usize,
}

impl NormalEquations {
    pub fn new(n_features: usize) -> Self {
        Self {
            gram: SquareMatrix::zeros(n_features),
            cross: vec![0.0; n_features * 6],
            n_samples: 0,
        }
    }

    /// Adds one sample. Samples must be pushed in a fixed order for
    /// bit-stable sums.
    pub fn push(&mut self, x: &[f64], y: &[f64; 6]) {
        self.gram.rank_one_upper(x);
        for (i, xi) in x.iter().enumerate() {
            for (c, yc) in y.iter().enumerate() {
                self.cross[i * 6 + c] += xi * yc;
            }
        }
        self.n_samples += 1;
    }

    pub fn finish(mut self) -> Self {
        self.gram.symmetrize_from_upper();
        self
    }
}

/// Channel counts after optional temperature compensation.
pub(crate) fn prepared_counts(
    frame: &CapacitanceFrame,
    compensator: Option<&TempCompensator>,
) -> [f64; 12] {
    let counts = frame_counts(frame);
    match compensator {
        Some(c) => c.compensate_counts(&counts, frame.temperature),
        None => counts,
    }
}

pub(crate) fn features_for(
    frame: &CapacitanceFrame,
    baseline: &Baseline,
    set: FeatureSet,
    compensator: Option<&TempCompensator>,
) -> FeatureVector {
    let counts = prepared_counts(frame, compensator);
    FeatureVector::from_tared(&tared_channels(&counts, baseline), set)
}

pub fn build_normal_equations(
    samples: &[LabeledFrame],
    baseline: &Baseline,
    set: FeatureSet,
    compensator: Option<&TempCompensator>,
) -> NormalEquations {
    let mut ne = NormalEquations::new(set.len());
    for s in samples {
        let x = features_for(&s.frame, baseline, set, compensator);
        ne.push(x.values(), &s.wrench.to_array());
    }
    ne.finish()
}

/// Fits the calibration matrix for `set` from labeled frames.
pub fn fit(
    samples: &[LabeledFrame],
    baseline: &Baseline,
    set: FeatureSet,
    opts: &FitOptions,
) -> Result<CalibrationModel, CalibrationError> {
    let n_feat = set.len();
    if samples.len() < n_feat {
        return Err(CalibrationError::InsufficientData {
            got: samples.len(),
            need: n_feat,
        });
    }
    let ne = build_normal_equations(samples, baseline, set, opts.compensator.as_ref());
    let lambda = match opts.ridge {
        Ridge::Auto => AUTO_RIDGE_FACTOR * ne.gram.trace() / n_feat as f64,
        Ridge::Fixed(l) if l >= 0.0 && l.is_finite() => l,
        Ridge::Fixed(l) => {
            return Err(CalibrationError::InvalidOption(format!(
                "ridge λ must be finite and non-negative, got {l}"
            )))
        }
    };
    let mut g = ne.gram.clone();
    for i in 0..n_feat {
        g.add(i, i, lambda);
    }
    let at = solve_spd(&g, &ne.cross, 6)?;
    let matrix: Vec<Vec<f64>> = (0..6)
        .map(|r| (0..n_feat).map(|i| at[i * 6 + r]).collect())
        .collect();

    let mut model = CalibrationModel {
        feature_set: set,
        matrix,
        baseline: *baseline,
        ridge: lambda,
        n_train: samples.len(),
        training_rmse: [0.0; 6],
        compensator: opts.compensator.clone(),
    };
    let mut sse = [0.0; 6];
    for s in samples {
        let p = model.predict(&s.frame).to_array();
        for (k, r) in s.wrench.to_array().iter().enumerate() {
            sse[k] += (p[k] - r).powi(2);
        }
    }
    model.training_rmse = sse.map(|e| (e / samples.len() as f64).sqrt());
    Ok(model)
}

impl CalibrationModel {
    pub fn n_features(&self) -> usize {
        self.feature_set.len()
    }

    pub fn features(&self, frame: &CapacitanceFrame) -> FeatureVector {
        features_for(
            frame,
            &self.baseline,
            self.feature_set,
            self.compensator.as_ref(),
        )
    }

    /// `A · x` for a feature vector of the model's channel set.
    pub fn predict_features(&self, x: &FeatureVector) -> Result<Wrench, CalibrationError> {
        if x.set() != self.feature_set {
            return Err(CalibrationError::ChannelMismatch {
                model: self.feature_set,
                features: x.set(),
            });
        }
        Ok(self.apply(x.values()))
    }

    fn apply(&self, x: &[f64]) -> Wrench {
        let mut out = [0.0; 6];
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Wrench::from_array(out)
    }

    pub fn predict(&self, frame: &CapacitanceFrame) -> Wrench {
        self.apply(self.features(frame).values())
    }

    /// Prediction against an explicit baseline instead of the stored tare.
    pub fn predict_with_baseline(&self, frame: &CapacitanceFrame, baseline: &Baseline) -> Wrench {
        let x = features_for(frame, baseline, self.feature_set, self.compensator.as_ref());
        self.apply(x.values())
    }

    /// Copy with every entry of `A` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        for row in &mut m.matrix {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        let n = self.n_features();
        if self.matrix.len() != 6 || self.matrix.iter().any(|r| r.len() != n) {
            return Err(CalibrationError::InvalidModel(format!(
                "matrix must be 6 × {n}"
            )));
        }
        if self.matrix.iter().flatten().any(|v| !v.is_finite())
            || self.baseline.iter().any(|v| !v.is_finite())
        {
            return Err(CalibrationError::InvalidModel(
                "non-finite matrix or baseline entry".into(),
            ));
        }
        Ok(())
    }
}

/// Stationarity of the ridge loss at the fitted matrix:
/// `max |X (Y − A X)ᵀ − λ Aᵀ| / max |X Yᵀ|`. With λ = 0 this is the plain
/// residual-orthogonality ratio of the normal equation.
pub fn optimality_ratio(model: &CalibrationModel, samples: &[LabeledFrame]) -> f64 {
    let n = model.n_features();
    let mut grad = vec![0.0; n * 6];
    let mut xy = vec![0.0; n * 6];
    for s in samples {
        let x = model.features(&s.frame);
        let pred = model.apply(x.values()).to_array();
        let y = s.wrench.to_array();
        for (i, xi) in x.values().iter().enumerate() {
            for c in 0..6 {
                grad[i * 6 + c] += xi * (y[c] - pred[c]);
                xy[i * 6 + c] += xi * y[c];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for c in 0..6 {
            worst = worst.max((grad[i * 6 + c] - model.ridge * model.matrix[c][i]).abs());
        }
    }
    let scale = xy.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    worst / scale
}
