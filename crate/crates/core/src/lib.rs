//! Digital twin of a capacitive coin-sized 6-axis force/torque sensor, its
//! least-squares calibration and temperature compensation, and a quadrotor
//! contact-force simulator driven by the sensor.

pub mod calibration;
pub mod controller;
pub mod dataio;
pub mod flight;
pub mod sensor;
pub mod types;
