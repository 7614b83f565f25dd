//! Point mass with first-order attitude, a compliant tip and an overhead
//! surface.

use serde::{Deserialize, Serialize};

use super::FlightError;
use crate::types::{UnitQuaternion, Vec3, GRAVITY};

/// Largest accepted plant step [s].
pub const MAX_PLANT_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParams {
    /// Airframe mass without payload [kg].
    pub mass: f64,
    /// Thrust normalization [1/N].
    pub k_f: f64,
    /// Attitude time constant [s].
    pub tau_att: f64,
    /// Largest normalized thrust.
    pub max_thrust: f64,
    /// [m/s²]
    pub gravity: [f64; 3],
}

impl Default for PlantParams {
    /// A small quadrotor; chosen values, not measurements.
    fn default() -> Self {
        Self {
            mass: 0.35,
            k_f: 0.08,
            tau_att: 0.05,
            max_thrust: 1.0,
            gravity: [0.0, 0.0, -GRAVITY],
        }
    }
}

impl PlantParams {
    pub fn gravity(&self) -> Vec3 {
        Vec3::new(self.gravity[0], self.gravity[1], self.gravity[2])
    }

    pub fn validate(&self) -> Result<(), FlightError> {
        let ok = self.mass > 0.0
            && self.k_f > 0.0
            && self.tau_att > 0.0
            && self.max_thrust > 0.0
            && self.mass.is_finite()
            && self.k_f.is_finite()
            && self.tau_att.is_finite()
            && self.max_thrust.is_finite()
            && self.gravity().is_finite();
        if ok {
            Ok(())
        } else {
            Err(FlightError::InvalidParameter(
                "plant needs finite m, k_f, tau_att, max_thrust > 0".into(),
            ))
        }
    }
}

/// Overhead surface with normal (0, 0, −1) and a spring-damper tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactEnv {
    /// Surface height z_s [m]; not visible to the controller.
    pub surface_height: f64,
    /// Tip series stiffness k_c [N/m].
    pub stiffness: f64,
    /// Tip series damping c_c [N·s/m].
    pub damping: f64,
    /// Tip distance from the body origin along body z [m].
    pub tip_offset: f64,
    /// [kg]
    pub payload_mass: f64,
    /// Contact force that bonds the payload to the surface [N].
    pub adhesion_threshold: f64,
}

impl Default for ContactEnv {
    fn default() -> Self {
        Self {
            surface_height: 1.0,
            stiffness: 100.0,
            damping: 5.0,
            tip_offset: 0.08,
            payload_mass: 0.095,
            adhesion_threshold: 4.0,
        }
    }
}

impl ContactEnv {
    pub fn validate(&self) -> Result<(), FlightError> {
        let ok = self.stiffness > 0.0
            && self.damping >= 0.0
            && self.adhesion_threshold > 0.0
            && self.payload_mass >= 0.0
            && [
                self.surface_height,
                self.stiffness,
                self.damping,
                self.tip_offset,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(FlightError::InvalidParameter(
                "contact needs k_c > 0, c_c >= 0, adhesion threshold > 0".into(),
            ))
        }
    }

    /// Body height at which the tip just touches the level surface [m].
    pub fn contact_height(&self) -> f64 {
        self.surface_height - self.tip_offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightState {
    pub p: Vec3,
    pub v: Vec3,
    pub q: UnitQuaternion,
    pub payload_attached: bool,
    pub t: f64,
}

impl FlightState {
    pub fn at_rest(p: Vec3, payload_attached: bool) -> Self {
        Self {
            p,
            v: Vec3::ZERO,
            q: UnitQuaternion::IDENTITY,
            payload_attached,
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.v.is_finite() && self.q.norm().is_finite() && self.t.is_finite()
    }

    pub fn tip(&self, env: &ContactEnv) -> Vec3 {
        self.p + self.q.rotate(Vec3::new(0.0, 0.0, env.tip_offset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    /// Normalized thrust f̂_cmd.
    pub thrust: f64,
    pub attitude: UnitQuaternion,
}

/// Spring-damper force from the surface on the tip [N], never negative.
/// Penetration is `tip_z − z_s`; damping only resists approach.
pub fn contact_force(state: &FlightState, env: &ContactEnv) -> f64 {
    let delta = state.tip(env).z - env.surface_height;
    let approach = state.v.z.max(0.0);
    (env.stiffness * delta + env.damping * approach).max(0.0)
}

/// Payload weight carried on the tip [N].
pub fn payload_weight(state: &FlightState, env: &ContactEnv, plant: &PlantParams) -> f64 {
    if state.payload_attached {
        env.payload_mass * plant.gravity().norm()
    } else {
        0.0
    }
}

/// One semi-implicit Euler step: velocity from forces at the start of the
/// step, position from the new velocity, attitude slerped toward the
/// command by `1 − exp(−dt/τ)`.
pub fn step_plant(
    state: &FlightState,
    cmd: &Command,
    plant: &PlantParams,
    env: &ContactEnv,
    dt: f64,
) -> Result<FlightState, FlightError> {
    if !(dt > 0.0 && dt <= MAX_PLANT_DT) {
        return Err(FlightError::InvalidParameter(format!(
            "plant step {dt} outside (0, {MAX_PLANT_DT}]"
        )));
    }
    let qn = cmd.attitude.norm();
    if !cmd.thrust.is_finite() || !qn.is_finite() || (qn - 1.0).abs() > 1e-6 {
        return Err(FlightError::NonFiniteCommand);
    }
    let f_contact = contact_force(state, env);
    let mass = plant.mass
        + if state.payload_attached {
            env.payload_mass
        } else {
            0.0
        };
    let thrust = cmd.thrust.clamp(0.0, plant.max_thrust) / plant.k_f;
    let z_body = state.q.rotate(Vec3::Z);
    let force = z_body * thrust + plant.gravity() * mass - Vec3::Z * f_contact;
    let v = state.v + force * (dt / mass);
    let p = state.p + v * dt;
    let q = state
        .q
        .slerp(&cmd.attitude, 1.0 - (-dt / plant.tau_att).exp());
    let next = FlightState {
        p,
        v,
        q,
        payload_attached: state.payload_attached && f_contact <= env.adhesion_threshold,
        t: state.t + dt,
    };
    if !next.is_finite() {
        return Err(FlightError::Diverged(next.t));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hover_cmd(plant: &PlantParams, mass: f64) -> Command {
        Command {
            thrust: plant.k_f * mass * GRAVITY,
            attitude: UnitQuaternion::IDENTITY,
        }
    }

    #[test]
    fn hover_balance() {
        let plant = PlantParams::default();
        let env = ContactEnv::default();
        let s0 = FlightState::at_rest(Vec3::new(0.0, 0.0, 0.5), false);
        let s1 = step_plant(&s0, &hover_cmd(&plant, plant.mass), &plant, &env, 1e-3).unwrap();
        assert!(s1.v.norm() / 1e-3 < 1e-9);
    }

    #[test]
    fn free_fall() {
        let plant = PlantParams::default();
        let env = ContactEnv::default();
        let s0 = FlightState::at_rest(Vec3::new(0.0, 0.0, 0.5), false);
        let cmd = Command {
            thrust: 0.0,
            attitude: UnitQuaternion::IDENTITY,
        };
        let s1 = step_plant(&s0, &cmd, &plant, &env, 1e-3).unwrap();
        assert!((s1.v.z / 1e-3 + GRAVITY).abs() < 1e-9);
        assert_eq!((s1.v.x, s1.v.y), (0.0, 0.0));
    }

    #[test]
    fn no_contact_below_surface() {
        let env = ContactEnv::default();
        let s = FlightState::at_rest(Vec3::new(0.0, 0.0, env.contact_height() - 0.01), false);
        assert_eq!(contact_force(&s, &env), 0.0);
    }

    #[test]
    fn static_hooke() {
        let env = ContactEnv {
            stiffness: 500.0,
            ..ContactEnv::default()
        };
        let s = FlightState::at_rest(Vec3::new(0.0, 0.0, env.contact_height() + 1e-3), false);
        assert!((contact_force(&s, &env) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_step_rejected() {
        let plant = PlantParams::default();
        let env = ContactEnv::default();
        let s = FlightState::at_rest(Vec3::ZERO, false);
        let c = hover_cmd(&plant, plant.mass);
        assert!(step_plant(&s, &c, &plant, &env, 0.0).is_err());
        assert!(step_plant(&s, &c, &plant, &env, 0.02).is_err());
        let nan = Command {
            thrust: f64::NAN,
            ..c
        };
        assert_eq!(
            step_plant(&s, &nan, &plant, &env, 1e-3),
            Err(FlightError::NonFiniteCommand)
        );
    }

    #[test]
    fn attitude_relaxes() {
        let plant = PlantParams::default();
        let env = ContactEnv::default();
        let target = UnitQuaternion::from_axis_angle(Vec3::X, 0.2).unwrap();
        let mut s = FlightState::at_rest(Vec3::ZERO, false);
        let cmd = Command {
            thrust: 0.3,
            attitude: target,
        };
        for _ in 0..50 {
            s = step_plant(&s, &cmd, &plant, &env, 1e-3).unwrap();
        }
        // one time constant leaves e^-1 of the angle
        let left = s.q.angle_to(&target) / 0.2;
        assert!((left - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn payload_detaches_once() {
        let plant = PlantParams::default();
        let env = ContactEnv::default();
        let mut s = FlightState::at_rest(Vec3::new(0.0, 0.0, env.contact_height() + 0.05), true);
        let c = hover_cmd(&plant, plant.mass);
        s = step_plant(&s, &c, &plant, &env, 1e-3).unwrap();
        assert!(!s.payload_attached);
        s.p.z -= 0.2;
        s = step_plant(&s, &c, &plant, &env, 1e-3).unwrap();
        assert!(!s.payload_attached);
    }
}
