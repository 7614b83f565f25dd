//! Force feedback for the controller: either the true normal load or a
//! reading through the sensor twin and a calibration model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::plant::{contact_force, payload_weight, ContactEnv, FlightState, PlantParams};
use super::FlightError;
use crate::calibration::{fit, CalibrationModel, FeatureSet, FitOptions};
use crate::dataio::{generate_trial, training_set, AxisRange, Scenario, WrenchRanges};
use crate::sensor::{SensorModel, SensorParams};
use crate::types::{Vec3, Wrench};

/// Sensor twin plus calibration, with its own noise stream.
#[derive(Debug, Clone)]
pub struct SensorStack {
    pub model: SensorModel,
    pub calibration: CalibrationModel,
    /// Sensor temperature during flight [°C].
    pub temperature: f64,
    rng: ChaCha8Rng,
}

impl SensorStack {
    pub fn new(
        params: SensorParams,
        calibration: CalibrationModel,
        temperature: f64,
        seed: u64,
    ) -> Result<Self, FlightError> {
        Ok(Self {
            model: SensorModel::new(params)?,
            calibration,
            temperature,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

/// Load box for calibrating a flight sensor: normal loads up to 8 N and
/// the small shear and moments that a tilted tip produces.
pub fn flight_calibration_scenario() -> Scenario {
    Scenario::with_ranges(
        "flight_range",
        WrenchRanges {
            fx: AxisRange::symmetric(2.0),
            fy: AxisRange::symmetric(2.0),
            fz: AxisRange::new(0.0, 8.0),
            mx: AxisRange::symmetric(10.0),
            my: AxisRange::symmetric(10.0),
            mz: AxisRange::symmetric(5.0),
        },
    )
}

/// Full-mode calibration fitted on `n_trials` synthetic flight-range
/// trials with seeds `seed, seed + 1, …`.
pub fn calibrate_for_flight(
    params: &SensorParams,
    n_trials: usize,
    seed: u64,
) -> Result<CalibrationModel, FlightError> {
    let sc = flight_calibration_scenario();
    let trials = (0..n_trials as u64)
        .map(|k| generate_trial(&sc, params, seed.wrapping_add(k)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| FlightError::Calibration(e.to_string()))?;
    let (samples, baseline) =
        training_set(&trials).map_err(|e| FlightError::Calibration(e.to_string()))?;
    fit(
        &samples,
        &baseline,
        FeatureSet::Full,
        &FitOptions::default(),
    )
    .map_err(|e| FlightError::Calibration(e.to_string()))
}

pub enum Sensing {
    /// Perfect feedback: the true normal load.
    Bypass,
    Stack(Box<SensorStack>),
}

/// Total normal load on the tip (contact plus attached payload) [N].
pub fn true_load(state: &FlightState, env: &ContactEnv, plant: &PlantParams) -> f64 {
    contact_force(state, env) + payload_weight(state, env, plant)
}

/// Wrench on the sensor from the world-vertical load, in the body frame.
/// Compression along body z is positive Fz.
pub fn sensor_wrench(state: &FlightState, load: f64) -> Wrench {
    let world = Vec3::new(0.0, 0.0, -load);
    let body = state.q.conjugate().rotate(world);
    Wrench::new(body.x, body.y, -body.z, 0.0, 0.0, 0.0)
}

/// Sensed normal force `|Fz|` [N].
pub fn sense(
    state: &FlightState,
    env: &ContactEnv,
    plant: &PlantParams,
    sensing: &mut Sensing,
) -> Result<f64, FlightError> {
    let load = true_load(state, env, plant);
    match sensing {
        Sensing::Bypass => Ok(load),
        Sensing::Stack(stack) => {
            let w = sensor_wrench(state, load);
            let frame = stack
                .model
                .sample(&w, stack.temperature, state.t, &mut stack.rng)
                .map_err(|e| FlightError::SensedRange(e.to_string()))?;
            Ok(stack.calibration.predict(&frame).fz.abs())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::UnitQuaternion;

    #[test]
    fn bypass_is_exact() {
        let env = ContactEnv::default();
        let plant = PlantParams::default();
        let s = FlightState::at_rest(Vec3::new(0.0, 0.0, env.contact_height() + 0.013), true);
        let f = sense(&s, &env, &plant, &mut Sensing::Bypass).unwrap();
        assert_eq!(f, contact_force(&s, &env) + 0.095 * 9.81);
    }

    #[test]
    fn level_wrench_is_pure_fz() {
        let s = FlightState::at_rest(Vec3::ZERO, false);
        let w = sensor_wrench(&s, 2.0);
        assert_eq!(w.to_array(), [0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn tilted_wrench_keeps_magnitude() {
        let mut s = FlightState::at_rest(Vec3::ZERO, false);
        s.q = UnitQuaternion::from_axis_angle(Vec3::X, 0.1).unwrap();
        let w = sensor_wrench(&s, 2.0);
        assert!((w.force().norm() - 2.0).abs() < 1e-12);
        assert!((w.fz - 2.0 * 0.1f64.cos()).abs() < 1e-12);
    }
}
