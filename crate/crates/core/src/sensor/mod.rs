//! Forward digital twin of the sensor: wrench and temperature in, integer
//! CDC counts out.

pub mod capacitance;
pub mod mechanics;
pub mod params;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::Wrench;

pub use capacitance::{normal_mode_capacitance, parallel_plate, shear_mode_capacitance};
pub use mechanics::{
    effective_modulus, pillar_stiffness, shore_to_youngs, solve_deformation, PlateDisplacement,
    StiffnessSet,
};
pub use params::{
    CdcParams, DriftModel, PillarModel, PillarRing, SensorGeometry, SensorParams, CHANNEL_NAMES,
    N_CHANNELS, SAMPLE_RATE_HZ,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensorError {
    #[error("invalid sensor parameter: {0}")]
    InvalidParameter(String),
    #[error("mechanical saturation: {0}")]
    Saturation(String),
    #[error("shear range exceeded: {0}")]
    RangeExceeded(String),
}

/// One interleaved CDC sample: Z1..Z4 then X1..X4, Y1..Y4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceFrame {
    pub normal: [u32; 4],
    pub shear: [u32; 8],
    /// [s]
    pub timestamp: f64,
    /// [°C]
    pub temperature: f64,
}

impl CapacitanceFrame {
    pub fn from_channels(counts: [u32; N_CHANNELS], timestamp: f64, temperature: f64) -> Self {
        let mut normal = [0; 4];
        let mut shear = [0; 8];
        normal.copy_from_slice(&counts[..4]);
        shear.copy_from_slice(&counts[4..]);
        Self {
            normal,
            shear,
            timestamp,
            temperature,
        }
    }

    /// Counts in channel order Z1..Z4, X1..X4, Y1..Y4.
    pub fn channels(&self) -> [u32; N_CHANNELS] {
        let mut out = [0; N_CHANNELS];
        out[..4].copy_from_slice(&self.normal);
        out[4..].copy_from_slice(&self.shear);
        out
    }
}

/// Sensor twin bound to one parameter set.
#[derive(Debug, Clone)]
pub struct SensorModel {
    params: SensorParams,
}

impl SensorModel {
    pub fn new(params: SensorParams) -> Result<Self, SensorError> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &SensorParams {
        &self.params
    }

    /// Noise-free capacitances [F] of all 12 channels at the reference
    /// temperature.
    pub fn capacitances(&self, w: &Wrench) -> Result<[f64; N_CHANNELS], SensorError> {
        let p = &self.params;
        let d = solve_deformation(w, &p.pillars, &p.geometry)?;
        let z = normal_mode_capacitance(&d, &p.geometry)?;
        let s = shear_mode_capacitance(&d, &p.geometry)?;
        let mut out = [0.0; N_CHANNELS];
        out[..4].copy_from_slice(&z);
        out[4..].copy_from_slice(&s);
        Ok(out)
    }

    /// Capacitances scaled by the thermal baseline factor at `temp` [F].
    pub fn drifted_capacitances(
        &self,
        w: &Wrench,
        temp: f64,
    ) -> Result<[f64; N_CHANNELS], SensorError> {
        let mut c = self.capacitances(w)?;
        for (k, v) in c.iter_mut().enumerate() {
            *v *= self.params.drift.factor(k, temp);
        }
        Ok(c)
    }

    /// Noise-free expected counts (before rounding).
    pub fn expected_counts(&self, w: &Wrench, temp: f64) -> Result<[f64; N_CHANNELS], SensorError> {
        let c = self.drifted_capacitances(w, temp)?;
        Ok(c.map(|v| self.analog_to_counts(v)))
    }

    fn analog_to_counts(&self, farads: f64) -> f64 {
        self.params.cdc.gain * farads * 1e15 + self.params.cdc.offset
    }

    fn quantize<R: Rng + ?Sized>(
        &self,
        expected: [f64; N_CHANNELS],
        rng: &mut R,
    ) -> [u32; N_CHANNELS] {
        let sigma = self.params.cdc.noise_sigma;
        let normal = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma checked"));
        expected.map(|e| {
            let noisy = match &normal {
                Some(n) => e + n.sample(rng),
                None => e,
            };
            noisy.round().max(0.0) as u32
        })
    }

    /// One CDC frame. Deterministic for a given RNG state.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        w: &Wrench,
        temp: f64,
        timestamp: f64,
        rng: &mut R,
    ) -> Result<CapacitanceFrame, SensorError> {
        let expected = self.expected_counts(w, temp)?;
        Ok(CapacitanceFrame::from_channels(
            self.quantize(expected, rng),
            timestamp,
            temp,
        ))
    }

    /// Stateful sampler that applies the optional output lag.
    pub fn stream(&self) -> SensorStream<'_> {
        SensorStream {
            model: self,
            state: None,
        }
    }
}

/// Sequential sampler at the CDC rate. With `lag_corner_hz` set, the analog
/// capacitances pass a first-order low-pass before conversion.
pub struct SensorStream<'a> {
    model: &'a SensorModel,
    state: Option<[f64; N_CHANNELS]>,
}

impl SensorStream<'_> {
    pub fn next<R: Rng + ?Sized>(
        &mut self,
        w: &Wrench,
        temp: f64,
        timestamp: f64,
        rng: &mut R,
    ) -> Result<CapacitanceFrame, SensorError> {
        let Some(fc) = self.model.params.cdc.lag_corner_hz else {
            return self.model.sample(w, temp, timestamp, rng);
        };
        let c = self.model.drifted_capacitances(w, temp)?;
        let alpha = 1.0 - (-2.0 * std::f64::consts::PI * fc / SAMPLE_RATE_HZ).exp();
        let filtered = match self.state {
            None => c,
            Some(prev) => {
                let mut out = prev;
                for k in 0..N_CHANNELS {
                    out[k] += alpha * (c[k] - prev[k]);
                }
                out
            }
        };
        self.state = Some(filtered);
        let expected = filtered.map(|v| self.model.analog_to_counts(v));
        Ok(CapacitanceFrame::from_channels(
            self.model.quantize(expected, rng),
            timestamp,
            temp,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> SensorModel {
        SensorModel::new(SensorParams::default()).unwrap()
    }

    #[test]
    fn noiseless_tare_is_rounded_baseline() {
        let m = SensorModel::new(SensorParams::default().noiseless()).unwrap();
        let t0 = m.params().drift.reference_temp;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = m.sample(&Wrench::ZERO, t0, 0.0, &mut rng).unwrap();
        let c = m.capacitances(&Wrench::ZERO).unwrap();
        for (k, counts) in f.channels().iter().enumerate() {
            assert_eq!(*counts, (c[k] * 1e15).round() as u32);
        }
    }

    #[test]
    fn same_seed_same_frame() {
        let m = model();
        let w = Wrench::new(0.5, -0.2, 3.0, 4.0, 1.0, -2.0);
        let a = m
            .sample(&w, 27.0, 0.1, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        let b = m
            .sample(&w, 27.0, 0.1, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn warm_baseline_shift_follows_drift_polynomial() {
        let mut p = SensorParams::default();
        p.cdc.noise_sigma = 0.0;
        let m = SensorModel::new(p).unwrap();
        let d = &m.params().drift;
        let t0 = d.reference_temp;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cold = m
            .sample(&Wrench::ZERO, t0, 0.0, &mut rng)
            .unwrap()
            .channels();
        let warm = m
            .sample(&Wrench::ZERO, t0 + 10.0, 0.0, &mut rng)
            .unwrap()
            .channels();
        let base = m.capacitances(&Wrench::ZERO).unwrap();
        for k in 0..N_CHANNELS {
            let hand = base[k] * 1e15 * (d.alpha[k] * 10.0 + d.beta[k] * 100.0);
            let shift = warm[k] as f64 - cold[k] as f64;
            assert!((shift - hand).abs() <= 1.0, "ch {k}: {shift} vs {hand}");
            let pct = shift / cold[k] as f64;
            assert!((0.009..=0.031).contains(&pct), "ch {k}: {pct}");
        }
    }

    #[test]
    fn lag_stream_settles_to_static_value() {
        let mut p = SensorParams::default().noiseless();
        p.cdc.lag_corner_hz = Some(97.0);
        let m = SensorModel::new(p).unwrap();
        let w = Wrench::new(0.0, 0.0, 4.0, 0.0, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = m.stream();
        let first = s.next(&Wrench::ZERO, 25.0, 0.0, &mut rng).unwrap();
        let step = s.next(&w, 25.0, 1.0 / 360.0, &mut rng).unwrap();
        let target = m.sample(&w, 25.0, 0.0, &mut rng).unwrap();
        assert!(step.normal[0] > first.normal[0] && step.normal[0] < target.normal[0]);
        let mut last = step;
        for i in 2..200 {
            last = s.next(&w, 25.0, i as f64 / 360.0, &mut rng).unwrap();
        }
        assert_eq!(last.channels(), target.channels());
    }
}
