//! Closed-loop missions: plant at `plant_dt`, sensor at its own rate and
//! the controller at `control_hz`, each held between updates.

use serde::{Deserialize, Serialize};

use super::plant::{step_plant, Command, ContactEnv, FlightState, PlantParams};
use super::sensing::{sense, true_load, Sensing};
use super::FlightError;
use crate::controller::{
    commanded_orientation, desired_force, desired_normalized_thrust, ForceProfile, GainSet,
    MachineState, SetpointSequence, ThrustMachine, ThrustParams,
};
use crate::types::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mission {
    TrackSine,
    DeployPackage,
}

impl Mission {
    pub fn name(self) -> &'static str {
        match self {
            Mission::TrackSine => "track_sine",
            Mission::DeployPackage => "deploy_package",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    /// [s]
    pub plant_dt: f64,
    /// [Hz]
    pub control_hz: f64,
    /// [Hz]
    pub sensor_hz: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            plant_dt: 1e-3,
            control_hz: 20.0,
            sensor_hz: crate::sensor::SAMPLE_RATE_HZ,
        }
    }
}

impl Timing {
    /// Plant steps per controller tick.
    fn control_every(&self) -> Result<u64, FlightError> {
        let ratio = 1.0 / (self.control_hz * self.plant_dt);
        let n = ratio.round();
        if !(n >= 1.0) || (ratio - n).abs() > 1e-9 {
            return Err(FlightError::InvalidParameter(format!(
                "controller period must be a whole number of plant steps, got {ratio}"
            )));
        }
        Ok(n as u64)
    }
}

/// Two-press package deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeployParams {
    /// Desired contact force per attempt [N].
    pub forces: Vec<f64>,
    /// Hover before the first press [s].
    pub hover_time: f64,
    /// Time below the surface after each press [s].
    pub settle_time: f64,
    /// Averaging window at the end of hover and settle phases [s].
    pub measure_window: f64,
    /// Residual above this fraction of the hover reading means the payload
    /// is still on the tip.
    pub attached_fraction: f64,
    /// HOLD duration of each press [s].
    pub press_duration: f64,
}

impl Default for DeployParams {
    fn default() -> Self {
        Self {
            forces: vec![0.7, 5.0],
            hover_time: 1.5,
            settle_time: 3.0,
            measure_window: 0.5,
            attached_fraction: 0.5,
            press_duration: 3.0,
        }
    }
}

fn default_search() -> SetpointSequence {
    SetpointSequence {
        target_xy: [0.0, 0.0],
        yaw: 0.0,
        z_lo: 0.62,
        z_hi: 1.1,
        search_speed: 0.1,
        force: ForceProfile::Sine {
            offset: 2.0,
            amplitude: 0.5,
            frequency_hz: 0.5,
        },
    }
}

fn default_temperature() -> f64 {
    25.0
}

/// Everything a flight run needs except the sensing stack. All defaults
/// are chosen values for a small quadrotor, not measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Simulated time limit [s].
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    /// Payload on the tip at take-off.
    #[serde(default)]
    pub payload_attached: bool,
    /// Sensor temperature [°C].
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub plant: PlantParams,
    #[serde(default)]
    pub env: ContactEnv,
    #[serde(default)]
    pub gains: GainSet,
    #[serde(default)]
    pub thrust: ThrustParams,
    #[serde(default = "default_search")]
    pub search: SetpointSequence,
    #[serde(default)]
    pub timing: Timing,
    #[serde(default)]
    pub deploy: DeployParams,
}

impl SimConfig {
    pub fn track_sine() -> Self {
        Self {
            duration: 16.0,
            seed: 0,
            payload_attached: false,
            temperature: default_temperature(),
            plant: PlantParams::default(),
            env: ContactEnv::default(),
            gains: GainSet::default(),
            thrust: ThrustParams::default(),
            search: default_search(),
            timing: Timing::default(),
            deploy: DeployParams::default(),
        }
    }

    pub fn deploy_package() -> Self {
        let deploy = DeployParams::default();
        let mut c = Self::track_sine();
        c.duration = 40.0;
        c.payload_attached = true;
        c.thrust.hold_duration = deploy.press_duration;
        c.search.force = ForceProfile::Constant {
            value: deploy.forces[0],
        };
        c.deploy = deploy;
        c
    }

    pub fn for_mission(m: Mission) -> Self {
        match m {
            Mission::TrackSine => Self::track_sine(),
            Mission::DeployPackage => Self::deploy_package(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, FlightError> {
        let c: Self =
            toml::from_str(text).map_err(|e| FlightError::InvalidParameter(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), FlightError> {
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(FlightError::InvalidParameter(
                "duration must be finite and non-negative".into(),
            ));
        }
        self.plant.validate()?;
        self.env.validate()?;
        self.gains.validate()?;
        self.thrust.validate()?;
        self.search.validate()?;
        self.timing.control_every()?;
        if !(self.timing.sensor_hz > 0.0) {
            return Err(FlightError::InvalidParameter(
                "sensor_hz must be positive".into(),
            ));
        }
        let d = &self.deploy;
        if d.forces.is_empty() || d.forces.iter().any(|f| !(*f > 0.0)) {
            return Err(FlightError::InvalidParameter(
                "deploy forces must be positive".into(),
            ));
        }
        if !(d.measure_window > 0.0
            && d.hover_time >= d.measure_window
            && d.settle_time >= d.measure_window)
        {
            return Err(FlightError::InvalidParameter(
                "deploy hover and settle times must cover the measurement window".into(),
            ));
        }
        Ok(())
    }
}

/// One controller tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub state: FlightState,
    /// Sensed normal force [N].
    pub f_oc: f64,
    /// Force fed to the state machine (sensed minus hover reading) [N].
    pub f_feedback: f64,
    /// True normal load [N].
    pub f_true: f64,
    pub f_dc: f64,
    /// Position-loop thrust f̂_des.
    pub f_des: f64,
    pub f_cmd: f64,
    pub machine: MachineState,
    pub saturated: bool,
    pub phase: &'static str,
}

pub const TRACE_HEADER: [&str; 21] = [
    "t",
    "px",
    "py",
    "pz",
    "vx",
    "vy",
    "vz",
    "qw",
    "qx",
    "qy",
    "qz",
    "f_oc",
    "f_dc",
    "f_cmd",
    "state",
    "payload_attached",
    "f_true",
    "f_feedback",
    "f_des",
    "saturated",
    "phase",
];

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for r in rows {
        let s = &r.state;
        let rec = [
            r.t.to_string(),
            s.p.x.to_string(),
            s.p.y.to_string(),
            s.p.z.to_string(),
            s.v.x.to_string(),
            s.v.y.to_string(),
            s.v.z.to_string(),
            s.q.w.to_string(),
            s.q.x.to_string(),
            s.q.y.to_string(),
            s.q.z.to_string(),
            r.f_oc.to_string(),
            r.f_dc.to_string(),
            r.f_cmd.to_string(),
            r.machine.label().to_string(),
            u8::from(s.payload_attached).to_string(),
            r.f_true.to_string(),
            r.f_feedback.to_string(),
            r.f_des.to_string(),
            u8::from(r.saturated).to_string(),
            r.phase.to_string(),
        ];
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackSummary {
    /// RMS of sensed minus desired force over HOLD [N].
    pub rms_error: f64,
    /// Same with the true load [N].
    pub rms_error_true: f64,
    pub max_abs_error: f64,
    pub hold_steps: usize,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeploySummary {
    /// Sensed load while hovering with the payload [N].
    pub hover_force: f64,
    /// Desired contact force of each attempt [N].
    pub attempt_forces: Vec<f64>,
    /// Sensed load after each attempt, away from the surface [N].
    pub residuals: Vec<f64>,
    /// Largest sensed load during each attempt [N].
    pub peak_forces: Vec<f64>,
    /// Simulated time of detachment [s].
    pub detached_at: Option<f64>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mission", rename_all = "snake_case")]
pub enum MissionSummary {
    TrackSine(TrackSummary),
    DeployPackage(DeploySummary),
}

#[derive(Debug, Clone)]
pub struct FlightOutcome {
    pub trace: Vec<TraceRow>,
    pub summary: MissionSummary,
    pub saturated_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Hover { until: f64 },
    Engage { attempt: usize, start: f64 },
    Settle { attempt: usize, until: f64 },
    Done,
}

impl Phase {
    fn label(&self) -> &'static str {
        match self {
            Phase::Hover { .. } => "hover",
            Phase::Engage { .. } => "engage",
            Phase::Settle { .. } => "settle",
            Phase::Done => "done",
        }
    }
}

/// Mean of the sensor readings taken in the last `window` seconds.
fn window_mean(readings: &[(f64, f64)], now: f64, window: f64) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for (t, f) in readings.iter().rev() {
        if now - t > window + 1e-12 {
            break;
        }
        s += f;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn simulate(
    cfg: &SimConfig,
    mission: Mission,
    sensing: &mut Sensing,
) -> Result<FlightOutcome, FlightError> {
    cfg.validate()?;
    let plant = &cfg.plant;
    let env = &cfg.env;
    let dt = cfg.timing.plant_dt;
    let every = cfg.timing.control_every()?;
    let sensor_period = 1.0 / cfg.timing.sensor_hz;
    let q_des = cfg.search.orientation();
    let [x0, y0] = cfg.search.target_xy;

    let mut thrust = cfg.thrust;
    let forces: Vec<f64> = match mission {
        Mission::TrackSine => vec![],
        Mission::DeployPackage => {
            thrust.hold_duration = cfg.deploy.press_duration;
            cfg.deploy.forces.clone()
        }
    };
    let mut machine = ThrustMachine::new(thrust, plant.max_thrust)?;
    let mut state = FlightState::at_rest(Vec3::new(x0, y0, cfg.search.z_lo), cfg.payload_attached);
    let mut mass_est = plant.mass
        + if cfg.payload_attached {
            env.payload_mass
        } else {
            0.0
        };
    let hover_thrust = plant.k_f * mass_est * plant.gravity().norm();
    machine.f_cmd = hover_thrust;
    let mut cmd = Command {
        thrust: hover_thrust,
        attitude: q_des,
    };

    let mut phase = match mission {
        Mission::TrackSine => Phase::Engage {
            attempt: 0,
            start: 0.0,
        },
        Mission::DeployPackage => {
            machine.armed = false;
            Phase::Hover {
                until: cfg.deploy.hover_time,
            }
        }
    };
    let mut frozen_z: Option<f64> = None;
    let mut f_base = 0.0;
    let mut readings: Vec<(f64, f64)> = Vec::new();
    let mut sensed = sense(&state, env, plant, sensing)?;
    readings.push((0.0, sensed));
    let mut next_sample = 1usize;

    let mut trace = Vec::new();
    let mut saturated_steps = 0usize;
    let mut hold_err = Vec::new();
    let mut hold_err_true = Vec::new();
    let mut residuals = Vec::new();
    let mut peaks: Vec<f64> = Vec::new();
    let mut detached_at = None;

    let n_steps = (cfg.duration / dt).round() as u64;
    for n in 0..n_steps {
        let t = n as f64 * dt;
        if n > 0 && t + 1e-12 >= next_sample as f64 * sensor_period {
            sensed = sense(&state, env, plant, sensing)?;
            readings.push((t, sensed));
            next_sample += 1;
        }

        if n % every == 0 {
            // mission bookkeeping before the control law
            match phase {
                Phase::Hover { until } if t + 1e-12 >= until => {
                    f_base = window_mean(&readings, t, cfg.deploy.measure_window);
                    machine.arm();
                    phase = Phase::Engage {
                        attempt: 0,
                        start: t,
                    };
                }
                Phase::Settle { attempt, until } if t + 1e-12 >= until => {
                    let residual = window_mean(&readings, t, cfg.deploy.measure_window);
                    residuals.push(residual);
                    let attached = residual > cfg.deploy.attached_fraction * f_base;
                    mass_est = plant.mass + if attached { env.payload_mass } else { 0.0 };
                    if attached && attempt + 1 < forces.len() {
                        machine.arm();
                        frozen_z = None;
                        phase = Phase::Engage {
                            attempt: attempt + 1,
                            start: t,
                        };
                    } else {
                        phase = Phase::Done;
                    }
                }
                _ => {}
            }
            if phase == Phase::Done {
                break;
            }

            let profile = match (mission, phase) {
                (Mission::DeployPackage, Phase::Engage { attempt, .. }) => {
                    Some(ForceProfile::Constant {
                        value: forces[attempt],
                    })
                }
                (Mission::TrackSine, Phase::Engage { .. }) => Some(cfg.search.force),
                _ => None,
            };
            let f_dc = match profile {
                Some(p) if machine.state == MachineState::Hold => p.at(t - machine.t0),
                Some(p) => p.at(0.0),
                None => 0.0,
            };
            let setpoint = match phase {
                Phase::Engage { start, .. } => {
                    cfg.search
                        .search_setpoint(t - start, machine.state, frozen_z)?
                }
                _ => cfg.search.search_setpoint(0.0, MachineState::Free, None)?,
            };

            // FREE flies on the out-of-contact pair, SEARCH and HOLD in contact
            let in_contact = machine.state != MachineState::Free;
            let f_vec = desired_force(
                state.p - setpoint.p,
                state.v - setpoint.v,
                &cfg.gains,
                mass_est,
                plant.gravity(),
                in_contact,
            );
            let q_cmd = commanded_orientation(f_vec, &setpoint.q)?;
            let f_des = desired_normalized_thrust(f_vec, &state.q, plant.k_f);
            let feedback = sensed - f_base;
            let out = machine.thrust_step(f_des, feedback, f_dc, t)?;
            if out.state == MachineState::Search && out.next == MachineState::Hold {
                frozen_z = Some(state.p.z);
            }
            if out.saturated {
                saturated_steps += 1;
            }
            let f_true = true_load(&state, env, plant);
            if let Phase::Engage { attempt, .. } = phase {
                if mission == Mission::DeployPackage {
                    if peaks.len() <= attempt {
                        peaks.push(0.0);
                    }
                    peaks[attempt] = peaks[attempt].max(sensed);
                }
            }
            if out.state == MachineState::Hold && mission == Mission::TrackSine {
                hold_err.push(feedback - f_dc);
                hold_err_true.push(f_true - f_dc);
            }
            trace.push(TraceRow {
                t,
                state,
                f_oc: sensed,
                f_feedback: feedback,
                f_true,
                f_dc,
                f_des,
                f_cmd: out.f_cmd,
                machine: out.state,
                saturated: out.saturated,
                phase: phase.label(),
            });
            cmd = Command {
                thrust: out.f_cmd,
                attitude: q_cmd,
            };
            if out.completed {
                match (mission, phase) {
                    (Mission::TrackSine, _) => phase = Phase::Done,
                    (Mission::DeployPackage, Phase::Engage { attempt, .. }) => {
                        frozen_z = None;
                        phase = Phase::Settle {
                            attempt,
                            until: t + cfg.deploy.settle_time,
                        };
                    }
                    _ => {}
                }
            }
        }
        if phase == Phase::Done {
            break;
        }
        let was_attached = state.payload_attached;
        state = step_plant(&state, &cmd, plant, env, dt)?;
        if was_attached && !state.payload_attached {
            detached_at = Some(state.t);
        }
    }

    let rms = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            (v.iter().map(|e| e * e).sum::<f64>() / v.len() as f64).sqrt()
        }
    };
    let summary = match mission {
        Mission::TrackSine => MissionSummary::TrackSine(TrackSummary {
            rms_error: rms(&hold_err),
            rms_error_true: rms(&hold_err_true),
            max_abs_error: hold_err.iter().fold(0.0, |m, e| m.max(e.abs())),
            hold_steps: hold_err.len(),
            completed: machine.engagements > 0,
        }),
        Mission::DeployPackage => MissionSummary::DeployPackage(DeploySummary {
            hover_force: f_base,
            attempt_forces: forces[..residuals.len().max(peaks.len()).min(forces.len())].to_vec(),
            success: residuals
                .last()
                .is_some_and(|r| *r <= cfg.deploy.attached_fraction * f_base),
            residuals,
            peak_forces: peaks,
            detached_at,
        }),
    };
    Ok(FlightOutcome {
        trace,
        summary,
        saturated_steps,
    })
}
