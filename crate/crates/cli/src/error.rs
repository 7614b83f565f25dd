use std::fmt;

use coinft::calibration::CalibrationError;
use coinft::controller::ControllerError;
use coinft::dataio::DataError;
use coinft::flight::FlightError;
use coinft::sensor::SensorError;

/// Process exit codes. Stable contract for scripts.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const MODEL: i32 = 4;
    pub const SIMULATION: i32 = 5;
    pub const SENSOR_SATURATION: i32 = 6;
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Model(String),
    Simulation(String),
    SensorSaturation(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) => exit::DATA,
            CliError::Model(_) => exit::MODEL,
            CliError::Simulation(_) => exit::SIMULATION,
            CliError::SensorSaturation(_) => exit::SENSOR_SATURATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Model(m) => write!(f, "model error: {m}"),
            CliError::Simulation(m) => write!(f, "simulation fault: {m}"),
            CliError::SensorSaturation(m) => write!(f, "sensor saturation: {m}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<SensorError> for CliError {
    fn from(e: SensorError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<FlightError> for CliError {
    fn from(e: FlightError) -> Self {
        match e {
            FlightError::SensedRange(m) => CliError::SensorSaturation(m),
            FlightError::Calibration(m) => CliError::Model(m),
            FlightError::InvalidParameter(m) => CliError::Usage(m),
            FlightError::Sensor(e) => CliError::Usage(e.to_string()),
            FlightError::Controller(ControllerError::SurfaceNotFound { z_hi }) => {
                CliError::Simulation(format!("surface not found below z_hi = {z_hi} m"))
            }
            other => CliError::Simulation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
