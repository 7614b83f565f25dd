use proptest::prelude::*;

use coinft::controller::{commanded_orientation, MachineState, ThrustMachine, ThrustParams};
use coinft::types::{quat_to_basis, UnitQuaternion, Vec3};

fn assert_orthonormal(b: (Vec3, Vec3, Vec3)) {
    let (x, y, z) = b;
    for v in [x, y, z] {
        assert!((v.norm() - 1.0).abs() < 1e-9);
    }
    assert!(x.dot(y).abs() < 1e-9 && y.dot(z).abs() < 1e-9 && x.dot(z).abs() < 1e-9);
    // right-handed
    assert!((x.cross(y) - z).norm() < 1e-9);
}

fn quat() -> impl Strategy<Value = UnitQuaternion> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate", |(w, x, y, z)| {
            w * w + x * x + y * y + z * z > 1e-3
        })
        .prop_map(|(w, x, y, z)| UnitQuaternion::new_normalize(w, x, y, z).unwrap())
}

proptest! {
    #[test]
    fn basis_of_any_quaternion_is_orthonormal(q in quat()) {
        assert_orthonormal(quat_to_basis(&q).unwrap());
    }

    #[test]
    fn commanded_orientation_is_orthonormal(
        yaw in -3.1..3.1f64,
        fx in -5.0..5.0f64,
        fy in -5.0..5.0f64,
        fz in 0.5..10.0f64,
    ) {
        let q_des = UnitQuaternion::from_axis_angle(Vec3::Z, yaw).unwrap();
        let f = Vec3::new(fx, fy, fz);
        let q = commanded_orientation(f, &q_des).unwrap();
        let (x, y, z) = quat_to_basis(&q).unwrap();
        assert_orthonormal((x, y, z));
        // thrust axis along the desired force
        prop_assert!((z - f * (1.0 / f.norm())).norm() < 1e-9);
    }

    #[test]
    fn hold_pid_matches_brute_force(
        errors in prop::collection::vec(-2.0..2.0f64, 1..40),
        gaps in prop::collection::vec(0.01..0.2f64, 40),
    ) {
        let params = ThrustParams {
            delta_f: 0.01,
            k_p: -0.03,
            k_i: -0.7,
            k_d: -0.004,
            hold_duration: 1e6,
            f_touch: 0.2,
            derivative_tau: None,
        };
        let f_dc = 2.0;
        let mut m = ThrustMachine::new(params, 10.0).unwrap();
        m.thrust_step(0.4, 1.0, f_dc, 0.0).unwrap();
        let latch = m.thrust_step(0.4, f_dc, f_dc, 0.05).unwrap();
        prop_assert_eq!(latch.next, MachineState::Hold);
        let f_hold = latch.f_cmd;

        let mut times = vec![0.05];
        for (k, e) in errors.iter().enumerate() {
            let t = times[k] + gaps[k];
            times.push(t);
            let out = m.thrust_step(0.0, f_dc + e, f_dc, t).unwrap();
            // every term recomputed from the full history
            let integral: f64 = (0..=k)
                .map(|j| params.k_i * errors[j] * (times[j + 1] - times[j]))
                .sum();
            let e_prev = if k == 0 { 0.0 } else { errors[k - 1] };
            let deriv = params.k_d * (e - e_prev) / (times[k + 1] - times[k]);
            let expect = (f_hold + params.k_p * e + integral + deriv).clamp(0.0, 10.0);
            prop_assert!((out.f_cmd - expect).abs() < 1e-12, "{} vs {}", out.f_cmd, expect);
        }
    }
}

#[test]
fn contact_never_skips_search() {
    let mut m = ThrustMachine::new(ThrustParams::default(), 1.0).unwrap();
    let mut seen = Vec::new();
    // sensed force jumps straight past the setpoint
    for (k, f_oc) in [0.0, 0.0, 5.0, 5.0, 5.0, 5.0].into_iter().enumerate() {
        let out = m.thrust_step(0.3, f_oc, 1.0, 0.05 * k as f64).unwrap();
        seen.push(out.next);
    }
    let first_hold = seen.iter().position(|s| *s == MachineState::Hold).unwrap();
    assert_eq!(seen[first_hold - 1], MachineState::Search);
    assert_eq!(
        seen,
        [
            MachineState::Free,
            MachineState::Free,
            MachineState::Search,
            MachineState::Hold,
            MachineState::Hold,
            MachineState::Hold
        ]
    );
}
