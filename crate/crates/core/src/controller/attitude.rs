//! Cascaded position/attitude law: force demand from position errors, then
//! a commanded body orientation and a thrust scalar.

use serde::{Deserialize, Serialize};

use super::{ControllerError, MachineState};
use crate::types::{cross_normalize, quat_to_basis, Mat3, UnitQuaternion, Vec3};

/// Smallest force demand that defines a thrust direction [N].
pub const MIN_FORCE_NORM: f64 = 0.1;

/// Out-of-contact and in-contact gain pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSet {
    /// [N/m]
    pub kp_oc: Mat3,
    /// [N·s/m]
    pub kv_oc: Mat3,
    pub kp_ic: Mat3,
    pub kv_ic: Mat3,
}

impl Default for GainSet {
    /// Tuned for the default 0.35 kg plant; not measured values.
    fn default() -> Self {
        Self {
            kp_oc: Mat3::diagonal([3.0, 3.0, 8.0]),
            kv_oc: Mat3::diagonal([1.5, 1.5, 3.0]),
            kp_ic: Mat3::diagonal([2.0, 2.0, 1.0]),
            kv_ic: Mat3::diagonal([1.0, 1.0, 1.0]),
        }
    }
}

impl GainSet {
    pub fn validate(&self) -> Result<(), ControllerError> {
        for (name, m) in [
            ("kp_oc", &self.kp_oc),
            ("kv_oc", &self.kv_oc),
            ("kp_ic", &self.kp_ic),
            ("kv_ic", &self.kv_ic),
        ] {
            if !m.0.iter().flatten().all(|v| v.is_finite()) || !m.is_positive_definite() {
                return Err(ControllerError::InvalidGains(format!(
                    "{name} is not symmetric positive-definite"
                )));
            }
        }
        Ok(())
    }
}

/// FREE uses the out-of-contact pair, SEARCH and HOLD the in-contact pair.
pub fn select_gains(state: MachineState, gains: &GainSet) -> (Mat3, Mat3) {
    match state {
        MachineState::Free => (gains.kp_oc, gains.kv_oc),
        MachineState::Search | MachineState::Hold => (gains.kp_ic, gains.kv_ic),
    }
}

/// `(p_obs − p_des, v_obs − v_des)`.
pub fn tracking_errors(p_obs: Vec3, v_obs: Vec3, p_des: Vec3, v_des: Vec3) -> (Vec3, Vec3) {
    (p_obs - p_des, v_obs - v_des)
}

/// `F_des = −Kp e_p − Kv e_v − m g` with the pair picked by `in_contact`.
pub fn desired_force(
    e_p: Vec3,
    e_v: Vec3,
    gains: &GainSet,
    mass: f64,
    gravity: Vec3,
    in_contact: bool,
) -> Vec3 {
    let (kp, kv) = if in_contact {
        (gains.kp_ic, gains.kv_ic)
    } else {
        (gains.kp_oc, gains.kv_oc)
    };
    -kp.mul_vec(e_p) - kv.mul_vec(e_v) - gravity * mass
}

/// Body orientation whose z axis points along `f_des`. The x axis follows
/// `y_cmd × z_des` and is then re-orthogonalized against `z_cmd`; this is a
/// no-op whenever `z_des` equals `z_cmd`.
pub fn commanded_orientation(
    f_des: Vec3,
    q_des: &UnitQuaternion,
) -> Result<UnitQuaternion, ControllerError> {
    let n = f_des.norm();
    if !n.is_finite() {
        return Err(ControllerError::NonFinite);
    }
    if n <= MIN_FORCE_NORM {
        return Err(ControllerError::ForceTooSmall(n));
    }
    let z_cmd = f_des / n;
    let (x_des, _, z_des) = quat_to_basis(q_des)?;
    let y_cmd = cross_normalize(z_cmd, x_des)?;
    let x_lit = y_cmd.cross(z_des);
    // x_lit is already orthogonal to y_cmd, so removing its z_cmd component
    // leaves ±(y_cmd × z_cmd); keep the sign that closes a right-handed triad
    let x_ortho = cross_normalize(y_cmd, z_cmd)?;
    let proj = x_lit - z_cmd * x_lit.dot(z_cmd);
    let x_cmd = if proj.dot(x_ortho) > 0.0 {
        proj / proj.norm()
    } else {
        x_ortho
    };
    let y_cmd = z_cmd.cross(x_cmd);
    Ok(UnitQuaternion::from_basis(x_cmd, y_cmd, z_cmd)?)
}

/// `k_f (F_des · z_obs)`.
pub fn desired_normalized_thrust(f_des: Vec3, q_obs: &UnitQuaternion, k_f: f64) -> f64 {
    k_f * f_des.dot(q_obs.rotate(Vec3::Z))
}
