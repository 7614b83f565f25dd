//! Search trajectory and desired contact-force profile.

use serde::{Deserialize, Serialize};

use super::{ControllerError, MachineState};
use crate::types::{UnitQuaternion, Vec3};

/// Desired contact force as a function of time since HOLD entry [N].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceProfile {
    Constant {
        value: f64,
    },
    Sine {
        offset: f64,
        amplitude: f64,
        frequency_hz: f64,
    },
}

impl ForceProfile {
    pub fn at(&self, since_hold: f64) -> f64 {
        match *self {
            ForceProfile::Constant { value } => value,
            ForceProfile::Sine {
                offset,
                amplitude,
                frequency_hz,
            } => offset + amplitude * (std::f64::consts::TAU * frequency_hz * since_hold).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoint {
    pub p: Vec3,
    pub v: Vec3,
    pub q: UnitQuaternion,
}

/// Vertical search below an overhead surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetpointSequence {
    /// Lateral position held over the target [m].
    pub target_xy: [f64; 2],
    /// Heading [rad]; roll and pitch stay level so the tip faces the surface.
    #[serde(default)]
    pub yaw: f64,
    /// [m]
    pub z_lo: f64,
    /// [m]
    pub z_hi: f64,
    /// [m/s]
    pub search_speed: f64,
    pub force: ForceProfile,
}

impl SetpointSequence {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let finite = self.target_xy.iter().all(|v| v.is_finite())
            && self.yaw.is_finite()
            && self.z_lo.is_finite()
            && self.z_hi.is_finite();
        if !finite || self.z_lo >= self.z_hi || !(self.search_speed > 0.0) {
            return Err(ControllerError::InvalidParameter(
                "search band needs z_lo < z_hi and a positive speed".into(),
            ));
        }
        Ok(())
    }

    pub fn orientation(&self) -> UnitQuaternion {
        UnitQuaternion::from_axis_angle(Vec3::Z, self.yaw).unwrap_or_default()
    }

    /// Setpoint `t` seconds after the search started. `frozen_z` is the
    /// contact height latched on HOLD entry.
    pub fn search_setpoint(
        &self,
        t: f64,
        state: MachineState,
        frozen_z: Option<f64>,
    ) -> Result<Setpoint, ControllerError> {
        let [x, y] = self.target_xy;
        let q = self.orientation();
        if let Some(z) = frozen_z {
            return Ok(Setpoint {
                p: Vec3::new(x, y, z),
                v: Vec3::ZERO,
                q,
            });
        }
        let z = self.z_lo + self.search_speed * t.max(0.0);
        if z > self.z_hi {
            if state == MachineState::Free {
                return Err(ControllerError::SurfaceNotFound { z_hi: self.z_hi });
            }
            return Ok(Setpoint {
                p: Vec3::new(x, y, self.z_hi),
                v: Vec3::ZERO,
                q,
            });
        }
        Ok(Setpoint {
            p: Vec3::new(x, y, z),
            v: Vec3::new(0.0, 0.0, self.search_speed),
            q,
        })
    }
}
