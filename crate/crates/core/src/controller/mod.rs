//! Switching cascaded attitude controller and the contact thrust state
//! machine.

mod attitude;
mod setpoint;
mod thrust;

use thiserror::Error;

use crate::types::GeometryError;

pub use attitude::{
    commanded_orientation, desired_force, desired_normalized_thrust, select_gains, tracking_errors,
    GainSet, MIN_FORCE_NORM,
};
pub use setpoint::{ForceProfile, Setpoint, SetpointSequence};
pub use thrust::{MachineState, PidTerms, ThrustMachine, ThrustOutput, ThrustParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("desired force norm {0:.3e} N too small to define a thrust axis")]
    ForceTooSmall(f64),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("non-positive HOLD time step {0}")]
    NonPositiveDt(f64),
    #[error("non-finite controller input")]
    NonFinite,
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("no contact before reaching z_hi = {z_hi} m")]
    SurfaceNotFound { z_hi: f64 },
}
