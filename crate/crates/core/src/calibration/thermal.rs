//! Baseline drift compensation: a per-channel quadratic in temperature,
//! fitted on a no-load sweep and subtracted before feature expansion.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::linalg::{solve_spd, SquareMatrix};
use super::CalibrationError;
use crate::sensor::{CapacitanceFrame, N_CHANNELS};

/// Minimum temperature span of a compensation sweep [°C].
pub const MIN_SWEEP_SPAN: f64 = 5.0;

/// Per-channel `a0 + a1 τ + a2 τ²` with `τ = T − reference_temp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempCompensator {
    /// [°C]
    pub reference_temp: f64,
    /// (a0 [counts], a1 [counts/°C], a2 [counts/°C²]) per channel.
    pub coeffs: [[f64; 3]; N_CHANNELS],
    /// Coefficient of determination over the temperature plateaus.
    pub r2: [Option<f64>; N_CHANNELS],
    /// Residual standard error of the plateau means [counts].
    pub residual_std: [f64; N_CHANNELS],
}

impl TempCompensator {
    /// Compensator that changes nothing.
    pub fn identity(reference_temp: f64, baseline: &[f64; N_CHANNELS]) -> Self {
        Self {
            reference_temp,
            coeffs: baseline.map(|b| [b, 0.0, 0.0]),
            r2: [None; N_CHANNELS],
            residual_std: [0.0; N_CHANNELS],
        }
    }

    /// Predicted no-load counts of channel `k` at `temp`.
    pub fn baseline_at(&self, k: usize, temp: f64) -> f64 {
        let t = temp - self.reference_temp;
        let [a0, a1, a2] = self.coeffs[k];
        a0 + a1 * t + a2 * t * t
    }

    /// `counts − p(T) + a0`: drift removed, reference baseline restored.
    pub fn compensate_counts(&self, counts: &[f64; N_CHANNELS], temp: f64) -> [f64; N_CHANNELS] {
        let mut out = *counts;
        for (k, v) in out.iter_mut().enumerate() {
            *v = *v - self.baseline_at(k, temp) + self.coeffs[k][0];
        }
        out
    }

    pub fn min_r2(&self) -> Option<f64> {
        self.r2.iter().flatten().copied().reduce(f64::min)
    }
}

/// Compensated frame; counts are rounded back to integers.
pub fn compensate(frame: &CapacitanceFrame, temp: f64, comp: &TempCompensator) -> CapacitanceFrame {
    let counts = frame.channels().map(|c| c as f64);
    let out = comp
        .compensate_counts(&counts, temp)
        .map(|v| v.round().max(0.0) as u32);
    CapacitanceFrame::from_channels(out, frame.timestamp, frame.temperature)
}

/// Fits the per-channel quadratic by least squares over all frames. Frames
/// sharing a temperature (to 1 m°C) form one plateau; R² and the residual
/// error are reported on the plateau means, which is where the drift curve
/// is resolved above the CDC noise.
pub fn fit_temp_baseline(
    sweep: &[CapacitanceFrame],
    reference_temp: f64,
) -> Result<TempCompensator, CalibrationError> {
    let mut plateaus: BTreeMap<i64, (f64, usize, [f64; N_CHANNELS])> = BTreeMap::new();
    for f in sweep {
        if !f.temperature.is_finite() {
            return Err(CalibrationError::InvalidOption(
                "non-finite temperature".into(),
            ));
        }
        let key = (f.temperature * 1000.0).round() as i64;
        let e = plateaus.entry(key).or_insert((0.0, 0, [0.0; N_CHANNELS]));
        e.0 += f.temperature;
        e.1 += 1;
        for (s, c) in e.2.iter_mut().zip(f.channels()) {
            *s += c as f64;
        }
    }
    if plateaus.len() < 3 {
        return Err(CalibrationError::TooFewTemperatures(plateaus.len()));
    }
    // plateau means: (T, weight, mean counts)
    let means: Vec<(f64, f64, [f64; N_CHANNELS])> = plateaus
        .values()
        .map(|(ts, n, sums)| {
            let w = *n as f64;
            (ts / w, w, sums.map(|s| s / w))
        })
        .collect();
    let t_min = means.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let t_max = means.iter().map(|m| m.0).fold(f64::NEG_INFINITY, f64::max);
    if t_max - t_min < MIN_SWEEP_SPAN {
        return Err(CalibrationError::InvalidOption(format!(
            "temperature span {:.2} °C below {MIN_SWEEP_SPAN} °C",
            t_max - t_min
        )));
    }

    // weighted normal equations in τ; identical to OLS over all frames
    let mut g = SquareMatrix::zeros(3);
    let mut b = vec![0.0; 3 * N_CHANNELS];
    for (t, w, m) in &means {
        let tau = t - reference_temp;
        let phi = [1.0, tau, tau * tau];
        for i in 0..3 {
            for j in 0..3 {
                g.add(i, j, w * phi[i] * phi[j]);
            }
            for k in 0..N_CHANNELS {
                b[i * N_CHANNELS + k] += w * phi[i] * m[k];
            }
        }
    }
    let sol = solve_spd(&g, &b, N_CHANNELS)?;

    let mut comp = TempCompensator {
        reference_temp,
        coeffs: [[0.0; 3]; N_CHANNELS],
        r2: [None; N_CHANNELS],
        residual_std: [0.0; N_CHANNELS],
    };
    for k in 0..N_CHANNELS {
        comp.coeffs[k] = [sol[k], sol[N_CHANNELS + k], sol[2 * N_CHANNELS + k]];
    }
    let w_total: f64 = means.iter().map(|m| m.1).sum();
    for k in 0..N_CHANNELS {
        let mean_k = means.iter().map(|m| m.1 * m.2[k]).sum::<f64>() / w_total;
        let (mut ss_res, mut ss_tot, mut ss_plain) = (0.0, 0.0, 0.0);
        for (t, w, m) in &means {
            let r = m[k] - comp.baseline_at(k, *t);
            ss_res += w * r * r;
            ss_tot += w * (m[k] - mean_k).powi(2);
            ss_plain += r * r;
        }
        if ss_tot > 0.0 {
            comp.r2[k] = Some(1.0 - ss_res / ss_tot);
        }
        let dof = means.len().saturating_sub(3);
        comp.residual_std[k] = if dof > 0 {
            (ss_plain / dof as f64).sqrt()
        } else {
            0.0
        };
    }
    Ok(comp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_sweep(value: u32) -> Vec<CapacitanceFrame> {
        (0..11)
            .flat_map(|i| {
                let t = 20.0 + i as f64;
                (0..5).map(move |_| CapacitanceFrame::from_channels([value; 12], 0.0, t))
            })
            .collect()
    }

    #[test]
    fn drift_free_sweep() {
        let c = fit_temp_baseline(&flat_sweep(800), 25.0).unwrap();
        for k in 0..N_CHANNELS {
            let [a0, a1, a2] = c.coeffs[k];
            assert!((a0 - 800.0).abs() < 1e-9);
            assert!(a1.abs() < 1e-9 && a2.abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_temperatures() {
        let frames: Vec<_> = [20.0, 30.0, 20.0]
            .iter()
            .map(|t| CapacitanceFrame::from_channels([1; 12], 0.0, *t))
            .collect();
        assert!(matches!(
            fit_temp_baseline(&frames, 25.0),
            Err(CalibrationError::TooFewTemperatures(2))
        ));
    }

    #[test]
    fn narrow_span_rejected() {
        let frames: Vec<_> = [24.0, 25.0, 26.0]
            .iter()
            .map(|t| CapacitanceFrame::from_channels([1; 12], 0.0, *t))
            .collect();
        assert!(fit_temp_baseline(&frames, 25.0).is_err());
    }

    #[test]
    fn identity_when_flat() {
        let comp = TempCompensator::identity(25.0, &[500.0; 12]);
        let f = CapacitanceFrame::from_channels([503; 12], 1.0, 25.0);
        assert_eq!(compensate(&f, 25.0, &comp), f);
        assert_eq!(compensate(&f, 31.0, &comp), f);
    }
}
