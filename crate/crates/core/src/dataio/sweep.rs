//! No-load temperature sweeps for fitting and checking drift compensation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DataError;
use crate::sensor::{CapacitanceFrame, SensorModel, SensorParams, SAMPLE_RATE_HZ};
use crate::types::Wrench;

/// `frames_per_plateau` unloaded frames at each temperature in turn.
pub fn temperature_plateaus(
    params: &SensorParams,
    temps: &[f64],
    frames_per_plateau: usize,
    seed: u64,
) -> Result<Vec<CapacitanceFrame>, DataError> {
    let model = SensorModel::new(params.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(temps.len() * frames_per_plateau);
    let mut i = 0usize;
    for &temp in temps {
        for _ in 0..frames_per_plateau {
            let t = i as f64 / SAMPLE_RATE_HZ;
            out.push(model.sample(&Wrench::ZERO, temp, t, &mut rng)?);
            i += 1;
        }
    }
    Ok(out)
}

/// Unloaded frames over a linear temperature ramp lasting `duration` [s].
pub fn temperature_ramp(
    params: &SensorParams,
    t_start: f64,
    t_end: f64,
    duration: f64,
    seed: u64,
) -> Result<Vec<CapacitanceFrame>, DataError> {
    let model = SensorModel::new(params.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (duration * SAMPLE_RATE_HZ).round() as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / SAMPLE_RATE_HZ;
            let frac = if n > 1 {
                i as f64 / (n - 1) as f64
            } else {
                0.0
            };
            let temp = t_start + (t_end - t_start) * frac;
            Ok(model.sample(&Wrench::ZERO, temp, t, &mut rng)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_layout() {
        let f = temperature_plateaus(&SensorParams::default(), &[20.0, 25.0, 30.0], 10, 1).unwrap();
        assert_eq!(f.len(), 30);
        assert_eq!(f[9].temperature, 20.0);
        assert_eq!(f[10].temperature, 25.0);
    }

    #[test]
    fn ramp_endpoints() {
        let f = temperature_ramp(&SensorParams::default(), 25.0, 35.0, 2.0, 1).unwrap();
        assert_eq!(f.len(), 720);
        assert_eq!(f[0].temperature, 25.0);
        assert_eq!(f[719].temperature, 35.0);
    }
}
