//! FREE → SEARCH → HOLD thrust state machine with the contact-force PID.
//!
//! One call per controller tick. FREE passes the position-loop thrust
//! through; SEARCH ramps the previous command by `delta_f`; HOLD adds
//! PID terms on `f_oc − f_dc` to the latched thrust. Gains act on that
//! error directly, so reducing excess force needs negative `k_p`, `k_i`,
//! `k_d`. After `hold_duration` the engagement ends: the machine returns
//! to FREE disarmed and passes thrust through until re-armed.

use serde::{Deserialize, Serialize};

use super::ControllerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MachineState {
    Free,
    Search,
    Hold,
}

impl MachineState {
    pub fn label(self) -> &'static str {
        match self {
            MachineState::Free => "FREE",
            MachineState::Search => "SEARCH",
            MachineState::Hold => "HOLD",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThrustParams {
    /// SEARCH increment per controller step [normalized].
    pub delta_f: f64,
    /// [1/N]
    pub k_p: f64,
    /// [1/(N·s)]
    pub k_i: f64,
    /// [s/N]
    pub k_d: f64,
    /// HOLD duration T [s].
    pub hold_duration: f64,
    /// Contact deadband for FREE → SEARCH [N].
    pub f_touch: f64,
    /// Optional first-order filter on the derivative term [s].
    #[serde(default)]
    pub derivative_tau: Option<f64>,
}

impl Default for ThrustParams {
    /// Tuned for the default plant and a 100 N/m tip; not measured values.
    fn default() -> Self {
        Self {
            delta_f: 0.008,
            k_p: -0.02,
            k_i: -1.0,
            k_d: -0.002,
            hold_duration: 10.0,
            f_touch: 0.2,
            derivative_tau: None,
        }
    }
}

impl ThrustParams {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let finite = [
            self.delta_f,
            self.k_p,
            self.k_i,
            self.k_d,
            self.hold_duration,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite
            || self.delta_f <= 0.0
            || self.hold_duration < 0.0
            || !(self.f_touch >= 0.0)
            || self.derivative_tau.is_some_and(|t| !(t > 0.0))
        {
            return Err(ControllerError::InvalidParameter(
                "thrust parameters need delta_f > 0, T >= 0, f_touch >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// PID breakdown of a HOLD step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidTerms {
    pub dt: f64,
    pub error: f64,
    pub p: f64,
    pub i: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustOutput {
    pub f_cmd: f64,
    /// The raw command fell outside `[0, max_thrust]` and was clamped.
    pub saturated: bool,
    /// State the step ran in.
    pub state: MachineState,
    /// State after the step.
    pub next: MachineState,
    pub pid: Option<PidTerms>,
    /// This step ended the engagement.
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThrustMachine {
    pub params: ThrustParams,
    /// Upper clamp on the command [normalized].
    pub max_thrust: f64,
    pub state: MachineState,
    /// FREE → SEARCH allowed.
    pub armed: bool,
    pub f_cmd: f64,
    pub f_hold: f64,
    pub e_prev: f64,
    pub integral: f64,
    pub t_prev: f64,
    pub t0: f64,
    d_filtered: f64,
    pub engagements: u32,
}

impl ThrustMachine {
    pub fn new(params: ThrustParams, max_thrust: f64) -> Result<Self, ControllerError> {
        params.validate()?;
        if !(max_thrust > 0.0 && max_thrust.is_finite()) {
            return Err(ControllerError::InvalidParameter(
                "max_thrust must be positive".into(),
            ));
        }
        Ok(Self {
            params,
            max_thrust,
            state: MachineState::Free,
            armed: true,
            f_cmd: 0.0,
            f_hold: 0.0,
            e_prev: 0.0,
            integral: 0.0,
            t_prev: 0.0,
            t0: 0.0,
            d_filtered: 0.0,
            engagements: 0,
        })
    }

    /// Prepares the next engagement.
    pub fn arm(&mut self) {
        self.state = MachineState::Free;
        self.armed = true;
        self.reset_pid();
    }

    fn reset_pid(&mut self) {
        self.e_prev = 0.0;
        self.integral = 0.0;
        self.d_filtered = 0.0;
    }

    fn clamp(&self, raw: f64) -> (f64, bool) {
        let c = raw.clamp(0.0, self.max_thrust);
        (c, c != raw)
    }

    pub fn thrust_step(
        &mut self,
        f_des: f64,
        f_oc: f64,
        f_dc: f64,
        t_cr: f64,
    ) -> Result<ThrustOutput, ControllerError> {
        if !(f_des.is_finite() && f_oc.is_finite() && f_dc.is_finite() && t_cr.is_finite()) {
            return Err(ControllerError::NonFinite);
        }
        let state = self.state;
        let mut pid = None;
        let mut completed = false;
        let raw = match state {
            MachineState::Free => {
                if self.armed && f_oc > self.params.f_touch {
                    self.state = MachineState::Search;
                }
                f_des
            }
            MachineState::Search => {
                let cmd = self.f_cmd + self.params.delta_f;
                if f_oc >= f_dc {
                    self.state = MachineState::Hold;
                    self.f_hold = cmd;
                    self.t_prev = t_cr;
                    self.t0 = t_cr;
                    self.reset_pid();
                }
                cmd
            }
            MachineState::Hold => {
                let dt = t_cr - self.t_prev;
                if !(dt > 0.0) {
                    return Err(ControllerError::NonPositiveDt(dt));
                }
                let e = f_oc - f_dc;
                let p = self.params.k_p * e;
                self.integral += self.params.k_i * e * dt;
                let d_raw = self.params.k_d * (e - self.e_prev) / dt;
                let d = match self.params.derivative_tau {
                    None => d_raw,
                    Some(tau) => {
                        self.d_filtered += dt / (tau + dt) * (d_raw - self.d_filtered);
                        self.d_filtered
                    }
                };
                self.e_prev = e;
                self.t_prev = t_cr;
                pid = Some(PidTerms {
                    dt,
                    error: e,
                    p,
                    i: self.integral,
                    d,
                });
                if t_cr - self.t0 >= self.params.hold_duration {
                    completed = true;
                    self.state = MachineState::Free;
                    self.armed = false;
                    self.engagements += 1;
                }
                self.f_hold + p + self.integral + d
            }
        };
        let (f_cmd, saturated) = self.clamp(raw);
        self.f_cmd = f_cmd;
        Ok(ThrustOutput {
            f_cmd,
            saturated,
            state,
            next: self.state,
            pid,
            completed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn machine() -> ThrustMachine {
        ThrustMachine::new(
            ThrustParams {
                delta_f: 0.01,
                k_p: 0.5,
                k_i: 0.2,
                k_d: 0.05,
                hold_duration: 1.0,
                f_touch: 0.2,
                derivative_tau: None,
            },
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn free_passes_through() {
        let mut m = machine();
        let out = m.thrust_step(0.4, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(out.f_cmd, 0.4);
        assert_eq!(m.state, MachineState::Free);
    }

    #[test]
    fn deadband() {
        let mut m = machine();
        m.thrust_step(0.4, 0.1, 1.0, 0.0).unwrap();
        assert_eq!(m.state, MachineState::Free);
        m.thrust_step(0.4, 0.3, 1.0, 0.05).unwrap();
        assert_eq!(m.state, MachineState::Search);
    }

    #[test]
    fn search_ramp() {
        let mut m = machine();
        m.thrust_step(0.4, 0.3, 5.0, 0.0).unwrap();
        for k in 1..=7 {
            let out = m.thrust_step(0.0, 0.5, 5.0, 0.05 * k as f64).unwrap();
            assert!((out.f_cmd - (0.4 + 0.01 * k as f64)).abs() < 1e-12);
        }
        assert_eq!(m.state, MachineState::Search);
    }

    #[test]
    fn zero_error_hold_is_constant() {
        let mut m = machine();
        m.thrust_step(0.4, 0.3, 1.0, 0.0).unwrap();
        let latch = m.thrust_step(0.4, 1.0, 1.0, 0.05).unwrap();
        assert_eq!(latch.next, MachineState::Hold);
        for k in 2..10 {
            let out = m.thrust_step(0.0, 1.0, 1.0, 0.05 * k as f64).unwrap();
            assert_eq!(out.f_cmd, m.f_hold);
        }
    }

    #[test]
    fn integral_accumulates() {
        let mut m = machine();
        m.thrust_step(0.4, 0.3, 1.0, 0.0).unwrap();
        m.thrust_step(0.4, 1.1, 1.0, 0.05).unwrap();
        let mut prev = 0.0;
        for k in 2..8 {
            let out = m.thrust_step(0.0, 1.1, 1.0, 0.05 * k as f64).unwrap();
            let i = out.pid.unwrap().i;
            assert!((i - prev - 0.001).abs() < 1e-12);
            prev = i;
        }
    }

    #[test]
    fn stale_time_rejected() {
        let mut m = machine();
        m.thrust_step(0.4, 0.3, 1.0, 0.0).unwrap();
        m.thrust_step(0.4, 1.1, 1.0, 0.05).unwrap();
        assert_eq!(
            m.thrust_step(0.4, 1.1, 1.0, 0.05),
            Err(ControllerError::NonPositiveDt(0.0))
        );
    }

    #[test]
    fn clamp_flags_saturation() {
        let mut m = machine();
        let out = m.thrust_step(3.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(out.f_cmd, 2.0);
        assert!(out.saturated);
        let out = m.thrust_step(-1.0, 0.0, 1.0, 0.05).unwrap();
        assert_eq!(out.f_cmd, 0.0);
        assert!(out.saturated);
    }

    #[test]
    fn disarmed_after_completion() {
        let mut m = machine();
        m.thrust_step(0.4, 0.3, 1.0, 0.0).unwrap();
        m.thrust_step(0.4, 1.0, 1.0, 0.05).unwrap();
        let mut t = 0.05;
        loop {
            t += 0.05;
            if m.thrust_step(0.4, 1.0, 1.0, t).unwrap().completed {
                break;
            }
        }
        assert!(t >= 1.05 - 1e-9);
        let out = m.thrust_step(0.45, 3.0, 1.0, t + 0.05).unwrap();
        assert_eq!(out.f_cmd, 0.45);
        assert_eq!(m.state, MachineState::Free);
        m.arm();
        m.thrust_step(0.45, 3.0, 1.0, t + 0.1).unwrap();
        assert_eq!(m.state, MachineState::Search);
    }

    #[test]
    fn filtered_derivative_is_smaller() {
        let mut raw = machine();
        let mut filt = machine();
        filt.params.derivative_tau = Some(0.2);
        for m in [&mut raw, &mut filt] {
            m.thrust_step(0.4, 0.3, 1.0, 0.0).unwrap();
            m.thrust_step(0.4, 1.0, 1.0, 0.05).unwrap();
        }
        let a = raw.thrust_step(0.0, 1.5, 1.0, 0.1).unwrap().pid.unwrap().d;
        let b = filt.thrust_step(0.0, 1.5, 1.0, 0.1).unwrap().pid.unwrap().d;
        assert!(b.abs() < a.abs());
    }
}
