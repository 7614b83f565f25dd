use coinft::controller::{ForceProfile, MachineState};
use coinft::flight::{
    calibrate_for_flight, contact_force, sense, simulate, step_plant, Command, ContactEnv,
    FlightState, Mission, PlantParams, Sensing, SensorStack, SimConfig,
};
use coinft::sensor::SensorParams;
use coinft::types::{UnitQuaternion, Vec3};

#[test]
fn free_fall_conserves_energy() {
    let plant = PlantParams::default();
    // surface far above so the tip never touches
    let env = ContactEnv {
        surface_height: 1e4,
        ..ContactEnv::default()
    };
    let g = plant.gravity().norm();
    let mut s = FlightState::at_rest(Vec3::new(0.0, 0.0, 500.0), false);
    let cmd = Command {
        thrust: 0.0,
        attitude: UnitQuaternion::IDENTITY,
    };
    let energy = |s: &FlightState| 0.5 * s.v.dot(s.v) + g * s.p.z;
    let e0 = energy(&s);
    for _ in 0..10_000 {
        s = step_plant(&s, &cmd, &plant, &env, 1e-3).unwrap();
    }
    assert!((s.t - 10.0).abs() < 1e-9);
    let drift = (energy(&s) - e0).abs() / e0;
    assert!(drift < 1e-3, "relative energy drift {drift}");
    // semi-implicit Euler drops exactly g t dt / 2 per unit mass
    let closed = g * 10.0 * 1e-3 / 2.0;
    assert!((500.0 - 0.5 * g * 100.0 - s.p.z - closed).abs() < 1e-6);
}

#[test]
fn climb_into_surface_follows_hooke() {
    let env = ContactEnv::default();
    let v = 0.02;
    let dt = 1e-4;
    let z0 = env.contact_height();
    let mut s = FlightState::at_rest(Vec3::new(0.0, 0.0, z0 - 0.01), false);
    s.v = Vec3::new(0.0, 0.0, v);
    for n in 0..20_000 {
        let t = n as f64 * dt;
        s.p.z = z0 - 0.01 + v * t;
        let delta = s.p.z - z0;
        let expect = (env.stiffness * delta + env.damping * v).max(0.0);
        assert!((contact_force(&s, &env) - expect).abs() < 1e-9);
    }
    assert!(contact_force(&s, &env) > 0.9);
}

#[test]
fn constant_setpoint_settles_within_three_seconds() {
    let mut cfg = SimConfig::track_sine();
    cfg.search.force = ForceProfile::Constant { value: 2.0 };
    let out = simulate(&cfg, Mission::TrackSine, &mut Sensing::Bypass).unwrap();
    let entry = out
        .trace
        .iter()
        .find(|r| r.machine == MachineState::Hold)
        .expect("reaches HOLD")
        .t;
    let late: Vec<f64> = out
        .trace
        .iter()
        .filter(|r| r.machine == MachineState::Hold && r.t >= entry + 3.0)
        .map(|r| (r.f_feedback - r.f_dc).abs())
        .collect();
    assert!(!late.is_empty());
    let worst = late.iter().cloned().fold(0.0, f64::max);
    assert!(worst < 0.05, "worst steady-state error {worst} N");
}

#[test]
fn trace_passes_through_search() {
    let out = simulate(
        &SimConfig::track_sine(),
        Mission::TrackSine,
        &mut Sensing::Bypass,
    )
    .unwrap();
    let states: Vec<MachineState> = out.trace.iter().map(|r| r.machine).collect();
    let hold = states
        .iter()
        .position(|s| *s == MachineState::Hold)
        .unwrap();
    assert!(states[..hold].contains(&MachineState::Search));
    assert_eq!(states[0], MachineState::Free);
}

#[test]
fn five_newtons_through_the_sensor_stack() {
    let params = SensorParams::default();
    let cal = calibrate_for_flight(&params, 3, 77).unwrap();
    let rmse_fz = cal.training_rmse[2];
    let mut sensing = Sensing::Stack(Box::new(SensorStack::new(params, cal, 25.0, 5).unwrap()));
    let env = ContactEnv::default();
    let plant = PlantParams::default();
    // 5 cm of tip compression on the 100 N/m spring
    let s = FlightState::at_rest(Vec3::new(0.0, 0.0, env.contact_height() + 0.05), false);
    assert!((contact_force(&s, &env) - 5.0).abs() < 1e-12);
    let n = 200;
    let mean = (0..n)
        .map(|_| sense(&s, &env, &plant, &mut sensing).unwrap())
        .sum::<f64>()
        / n as f64;
    assert!((mean - 5.0).abs() < rmse_fz, "mean {mean}, rmse {rmse_fz}");
}
