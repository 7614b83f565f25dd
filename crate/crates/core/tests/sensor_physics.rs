//! Sensor twin against independent numerical oracles.

use coinft::sensor::mechanics::normal_force;
use coinft::sensor::{
    pillar_stiffness, solve_deformation, PillarModel, SensorGeometry, SensorModel, SensorParams,
};
use coinft::types::Wrench;

/// Tangent stiffness of one pillar written out from the constant-volume
/// bonded-disk law, without the library.
fn oracle_tangent(p: &PillarModel, dz: f64) -> f64 {
    let u = p.height - dz;
    let r2 = p.radius * p.radius * p.height / u;
    let e = p.youngs_modulus * (1.0 + 0.5 * r2 / (u * u));
    e * std::f64::consts::PI * r2 / u
}

/// Force of the layer by composite Simpson quadrature of the tangent law.
fn oracle_force(p: &PillarModel, dz: f64) -> f64 {
    let n = 2000;
    let h = dz / n as f64;
    let mut s = oracle_tangent(p, 0.0) + oracle_tangent(p, dz);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * oracle_tangent(p, i as f64 * h);
    }
    p.count() as f64 * s * h / 3.0
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn ten_newton_compression_matches_bisection() {
    let p = PillarModel::default();
    let g = SensorGeometry::default();
    let dz_oracle = bisect(0.0, 0.8 * p.height, |dz| oracle_force(&p, dz) - 10.0);
    let d = solve_deformation(&Wrench::new(0.0, 0.0, 10.0, 0.0, 0.0, 0.0), &p, &g).unwrap();
    assert!(
        ((d.dz - dz_oracle) / dz_oracle).abs() < 1e-9,
        "{} vs {}",
        d.dz,
        dz_oracle
    );
}

#[test]
fn stiffness_is_the_force_derivative() {
    let p = PillarModel::default();
    for dz in [0.0, 5e-6, 20e-6, 60e-6] {
        let h = 1e-9;
        let fd =
            (normal_force(&p, dz + h).unwrap() - normal_force(&p, dz - h).unwrap()) / (2.0 * h);
        let k = pillar_stiffness(&p, dz).unwrap().k_z;
        assert!(((fd - k) / k).abs() < 1e-6, "dz {dz}: {fd} vs {k}");
        let kn = p.count() as f64 * oracle_tangent(&p, dz);
        assert!(((kn - k) / k).abs() < 1e-12);
    }
}

fn normal_deviation(params: &SensorParams, w: &Wrench) -> [f64; 4] {
    let m = SensorModel::new(params.clone()).unwrap();
    let c0 = m.capacitances(&Wrench::ZERO).unwrap();
    let c = m.capacitances(w).unwrap();
    [c[0] - c0[0], c[1] - c0[1], c[2] - c0[2], c[3] - c0[3]]
}

#[test]
fn moment_sensitivity_grows_with_quadrant_radius() {
    let mx = Wrench::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let mut sens = Vec::new();
    for r in [3e-3, 6e-3] {
        let mut params = SensorParams::default();
        params.geometry.quadrant_radius = r;
        let d = normal_deviation(&params, &mx);
        sens.push(d[0] + d[1] - d[2] - d[3]);
    }
    // gap change under a fixed tilt is linear in the lever arm
    assert!((sens[1] / sens[0] - 2.0).abs() < 1e-3, "{sens:?}");
}

#[test]
fn pure_moment_leaves_normal_sum_at_second_order() {
    let params = SensorParams::default();
    let sum_and_diff = |m: f64| {
        let d = normal_deviation(&params, &Wrench::new(0.0, 0.0, 0.0, m, 0.0, 0.0));
        (d.iter().sum::<f64>(), d[0] + d[1] - d[2] - d[3])
    };
    let (s1, d1) = sum_and_diff(2.0);
    let (s2, d2) = sum_and_diff(4.0);
    // the first-order gap changes cancel across opposite quadrants
    assert!(s1.abs() < 1e-2 * d1.abs());
    assert!((s2 / s1 - 4.0).abs() < 0.05, "{s1} {s2}");
    assert!((d2 / d1 - 2.0).abs() < 0.01);
}
