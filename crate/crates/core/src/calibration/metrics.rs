use serde::{Deserialize, Serialize};

use super::fit::CalibrationModel;
use super::{CalibrationError, LabeledFrame};
use crate::types::Wrench;

/// Per-axis accuracy. Forces in N, moments in mN·m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: [f64; 6],
    /// `None` when the reference axis is constant.
    pub r2: [Option<f64>; 6],
    pub n: usize,
}

impl Metrics {
    /// Smallest defined R² across axes.
    pub fn min_r2(&self) -> Option<f64> {
        self.r2.iter().flatten().copied().reduce(f64::min)
    }
}

/// RMSE and R² (around the reference mean) from paired series.
pub fn metrics_from_pairs(
    predicted: &[Wrench],
    reference: &[Wrench],
) -> Result<Metrics, CalibrationError> {
    if predicted.is_empty() {
        return Err(CalibrationError::EmptyInput(
            "metrics need at least one sample",
        ));
    }
    if predicted.len() != reference.len() {
        return Err(CalibrationError::InvalidOption(format!(
            "{} predictions for {} references",
            predicted.len(),
            reference.len()
        )));
    }
    let n = reference.len() as f64;
    let mut mean = [0.0; 6];
    for r in reference {
        for (m, v) in mean.iter_mut().zip(r.to_array()) {
            *m += v;
        }
    }
    let mean = mean.map(|m| m / n);
    let mut ss_res = [0.0; 6];
    let mut ss_tot = [0.0; 6];
    for (p, r) in predicted.iter().zip(reference) {
        let (p, r) = (p.to_array(), r.to_array());
        for k in 0..6 {
            ss_res[k] += (p[k] - r[k]).powi(2);
            ss_tot[k] += (r[k] - mean[k]).powi(2);
        }
    }
    let mut r2 = [None; 6];
    for k in 0..6 {
        if ss_tot[k] > 0.0 {
            r2[k] = Some(1.0 - ss_res[k] / ss_tot[k]);
        }
    }
    Ok(Metrics {
        rmse: ss_res.map(|s| (s / n).sqrt()),
        r2,
        n: reference.len(),
    })
}

pub fn evaluate(
    model: &CalibrationModel,
    test: &[LabeledFrame],
) -> Result<Metrics, CalibrationError> {
    let pred: Vec<Wrench> = test.iter().map(|s| model.predict(&s.frame)).collect();
    let reference: Vec<Wrench> = test.iter().map(|s| s.wrench).collect();
    metrics_from_pairs(&pred, &reference)
}
