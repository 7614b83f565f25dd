//! Quadrotor plant with a compliant contact tip, force sensing through the
//! sensor twin, and the closed-loop missions.

mod plant;
mod sensing;
mod sim;

use thiserror::Error;

use crate::controller::ControllerError;
use crate::sensor::SensorError;

pub use plant::{
    contact_force, payload_weight, step_plant, Command, ContactEnv, FlightState, PlantParams,
    MAX_PLANT_DT,
};
pub use sensing::{
    calibrate_for_flight, flight_calibration_scenario, sense, sensor_wrench, true_load, Sensing,
    SensorStack,
};
pub use sim::{
    simulate, trace_csv, DeployParams, DeploySummary, FlightOutcome, Mission, MissionSummary,
    SimConfig, Timing, TraceRow, TrackSummary, TRACE_HEADER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlightError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("non-finite plant command")]
    NonFiniteCommand,
    #[error("state diverged at t = {0} s")]
    Diverged(f64),
    #[error("sensed load outside the sensor range: {0}")]
    SensedRange(String),
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("sensor: {0}")]
    Sensor(#[from] SensorError),
    #[error("controller: {0}")]
    Controller(#[from] ControllerError),
}
