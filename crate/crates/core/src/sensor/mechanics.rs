//! Lumped pillar-array mechanics.
//!
//! Each pillar is a bonded incompressible elastomer column. Under a
//! compression `dz` its volume is conserved, so the radius grows as the
//! height shrinks; the effective modulus is re-evaluated at the compressed
//! aspect ratio, which stiffens the array as it closes.

use serde::{Deserialize, Serialize};

use super::params::{PillarModel, SensorGeometry};
use super::SensorError;
use crate::types::Wrench;

/// Loads that would compress the pillars beyond this fraction of their
/// height are treated as saturating.
pub const MAX_COMPRESSION_FRACTION: f64 = 0.8;

/// Gent's relation between Shore A hardness and Young's modulus [Pa].
pub fn shore_to_youngs(shore_a: f64) -> Result<f64, SensorError> {
    if !(10.0..=90.0).contains(&shore_a) {
        return Err(SensorError::InvalidParameter(format!(
            "Shore A hardness {shore_a} outside [10, 90]"
        )));
    }
    let mpa = 0.0981 * (56.0 + 7.62336 * shore_a) / (0.137505 * (254.0 - 2.54 * shore_a));
    Ok(mpa * 1e6)
}

/// Effective modulus of a bonded disk, `E (1 + η⁻²/2)`.
pub fn effective_modulus(youngs: f64, aspect_ratio: f64) -> Result<f64, SensorError> {
    if !(youngs > 0.0 && aspect_ratio > 0.0) || !youngs.is_finite() || !aspect_ratio.is_finite() {
        return Err(SensorError::InvalidParameter(
            "effective modulus needs E > 0 and η > 0".into(),
        ));
    }
    Ok(youngs * (1.0 + 0.5 / (aspect_ratio * aspect_ratio)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessSet {
    /// Tangent normal stiffness [N/m].
    pub k_z: f64,
    /// Shear stiffness [N/m].
    pub k_xy: f64,
    /// Torsional stiffness about z [N·m/rad].
    pub k_theta_z: f64,
    /// Tilt stiffness about x or y [N·m/rad].
    pub k_theta_xy: f64,
}

/// Relative plate motion (top plate w.r.t. bottom plate).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlateDisplacement {
    /// Gap closure [m], positive in compression.
    pub dz: f64,
    pub theta_x: f64,
    pub theta_y: f64,
    pub dx: f64,
    pub dy: f64,
    pub theta_z: f64,
}

fn check_compression(p: &PillarModel, dz: f64) -> Result<(), SensorError> {
    if !dz.is_finite() || dz >= p.height || dz <= -p.height {
        return Err(SensorError::Saturation(format!(
            "compression {dz:e} m outside (-h, h) with h = {:e} m",
            p.height
        )));
    }
    Ok(())
}

/// Tangent normal stiffness of a single pillar at compression `dz` [N/m].
fn pillar_tangent_stiffness(p: &PillarModel, dz: f64) -> f64 {
    let h = p.height;
    let u = h - dz;
    // constant volume: r_eff² = r² h / u
    let r_eff2 = p.radius * p.radius * h / u;
    let eta2 = u * u / r_eff2;
    let e_eff = p.youngs_modulus * (1.0 + 0.5 / eta2);
    let area = std::f64::consts::PI * r_eff2;
    e_eff * area / u
}

/// Normal force carried by one pillar at compression `dz` [N]: the exact
/// integral of the tangent stiffness from 0 to `dz`.
fn pillar_force(p: &PillarModel, dz: f64) -> f64 {
    let h = p.height;
    let u = h - dz;
    let r2 = p.radius * p.radius;
    let c = p.youngs_modulus * std::f64::consts::PI * r2 * h;
    c * ((1.0 / u - 1.0 / h) + 0.125 * r2 * h * (u.powi(-4) - h.powi(-4)))
}

/// Stiffness of the whole pillar layer at compression `dz`. Shear and
/// torsion use the undeformed pillar section; normal and tilt stiffness
/// follow the compressed geometry.
pub fn pillar_stiffness(p: &PillarModel, dz: f64) -> Result<StiffnessSet, SensorError> {
    p.validate()?;
    check_compression(p, dz)?;
    let n = p.count() as f64;
    let k1 = pillar_tangent_stiffness(p, dz);
    let shear1 = p.shear_modulus() * p.pillar_area() / p.height;
    Ok(StiffnessSet {
        k_z: n * k1,
        k_xy: n * shear1,
        k_theta_z: shear1 * p.polar_sum(),
        k_theta_xy: k1 * p.planar_second_moment(),
    })
}

/// Total normal force of the layer at compression `dz` [N].
pub fn normal_force(p: &PillarModel, dz: f64) -> Result<f64, SensorError> {
    check_compression(p, dz)?;
    Ok(p.count() as f64 * pillar_force(p, dz))
}

/// Static equilibrium of the plate under `w`. The normal direction is
/// solved with a safeguarded Newton iteration on the nonlinear force law;
/// the remaining axes are linear at the resulting compression.
pub fn solve_deformation(
    w: &Wrench,
    p: &PillarModel,
    g: &SensorGeometry,
) -> Result<PlateDisplacement, SensorError> {
    if !w.is_finite() {
        return Err(SensorError::InvalidParameter("non-finite wrench".into()));
    }
    p.validate()?;
    let limit = MAX_COMPRESSION_FRACTION * p.height;
    let n = p.count() as f64;
    let target = w.fz;
    let f_of = |dz: f64| n * pillar_force(p, dz) - target;

    let (mut lo, mut hi) = (-limit, limit);
    if f_of(hi) < 0.0 || f_of(lo) > 0.0 {
        return Err(SensorError::Saturation(format!(
            "Fz = {target} N exceeds the mechanical range"
        )));
    }
    let mut dz = 0.0;
    let mut converged = target == 0.0;
    for _ in 0..100 {
        if converged {
            break;
        }
        let r = f_of(dz);
        if r.abs() <= 1e-12 * target.abs().max(1.0) {
            converged = true;
            break;
        }
        if r > 0.0 {
            hi = dz;
        } else {
            lo = dz;
        }
        let step = r / (n * pillar_tangent_stiffness(p, dz));
        let mut next = dz - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - dz).abs() <= 1e-18 {
            dz = next;
            converged = f_of(dz).abs() <= 1e-9;
            break;
        }
        dz = next;
    }
    if !converged {
        return Err(SensorError::Saturation(
            "normal equilibrium did not converge".into(),
        ));
    }
    if dz.abs() >= g.nominal_gap {
        return Err(SensorError::Saturation("plates would touch".into()));
    }

    let k = pillar_stiffness(p, dz)?;
    Ok(PlateDisplacement {
        dz,
        theta_x: w.mx * 1e-3 / k.k_theta_xy,
        theta_y: w.my * 1e-3 / k.k_theta_xy,
        dx: w.fx / k.k_xy,
        dy: w.fy / k.k_xy,
        theta_z: w.mz * 1e-3 / k.k_theta_z,
    })
}

/// Wrench that holds the plate at displacement `d` (inverse of
/// [`solve_deformation`]).
pub fn wrench_from_displacement(
    d: &PlateDisplacement,
    p: &PillarModel,
) -> Result<Wrench, SensorError> {
    let k = pillar_stiffness(p, d.dz)?;
    Ok(Wrench::new(
        k.k_xy * d.dx,
        k.k_xy * d.dy,
        normal_force(p, d.dz)?,
        k.k_theta_xy * d.theta_x * 1e3,
        k.k_theta_xy * d.theta_y * 1e3,
        k.k_theta_z * d.theta_z * 1e3,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gent_golden_values() {
        // 0.0981 (56 + 7.62336·30) / (0.137505 (254 − 76.2)) MPa
        let e30 = shore_to_youngs(30.0).unwrap();
        assert!((e30 - 1_142_371.731_732_5).abs() < 1e-6, "{e30}");
        assert!(shore_to_youngs(40.0).unwrap() > e30);
        assert!(shore_to_youngs(5.0).is_err());
        assert!(shore_to_youngs(95.0).is_err());
    }

    #[test]
    fn effective_modulus_cases() {
        assert!((effective_modulus(1e6, 1e6).unwrap() / 1e6 - 1.0).abs() < 1e-6);
        assert_eq!(effective_modulus(1e6, 1.0).unwrap(), 1.5e6);
        let e = effective_modulus(2e6, 2.54).unwrap();
        assert!((e - 2.155e6).abs() / 2.155e6 < 1e-4, "{e}");
        assert!(effective_modulus(0.0, 1.0).is_err());
        assert!(effective_modulus(1.0, -1.0).is_err());
    }

    #[test]
    fn undeformed_normal_stiffness() {
        let p = PillarModel::default();
        let k = pillar_stiffness(&p, 0.0).unwrap();
        let ee = effective_modulus(p.youngs_modulus, p.aspect_ratio()).unwrap();
        let expect = p.count() as f64 * ee * p.pillar_area() / p.height;
        assert!((k.k_z - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn stiffening_with_compression() {
        let p = PillarModel::default();
        let k0 = pillar_stiffness(&p, 0.0).unwrap().k_z;
        let k3 = pillar_stiffness(&p, 0.3 * p.height).unwrap().k_z;
        assert!(k3 > k0);
        assert!(pillar_stiffness(&p, p.height).is_err());
    }

    #[test]
    fn shear_scales_with_area() {
        let p = PillarModel::default();
        let mut p2 = p.clone();
        p2.radius *= 2.0;
        let a = pillar_stiffness(&p, 0.0).unwrap().k_xy;
        let b = pillar_stiffness(&p2, 0.0).unwrap().k_xy;
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_and_pure_normal_loads() {
        let (p, g) = (PillarModel::default(), SensorGeometry::default());
        assert_eq!(
            solve_deformation(&Wrench::ZERO, &p, &g).unwrap(),
            PlateDisplacement::default()
        );
        let d = solve_deformation(&Wrench::new(0.0, 0.0, 5.0, 0.0, 0.0, 0.0), &p, &g).unwrap();
        assert!(d.dz > 0.0);
        assert_eq!(
            (d.dx, d.dy, d.theta_x, d.theta_y, d.theta_z),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn residual_below_nano_newton() {
        let (p, g) = (PillarModel::default(), SensorGeometry::default());
        for fz in [0.01, 1.0, 7.5, 14.0, -2.0] {
            let w = Wrench::new(1.0, -2.0, fz, 10.0, -5.0, 3.0);
            let d = solve_deformation(&w, &p, &g).unwrap();
            let back = wrench_from_displacement(&d, &p).unwrap();
            for (a, b) in w.to_array().iter().zip(back.to_array()) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn overload_saturates() {
        let (p, g) = (PillarModel::default(), SensorGeometry::default());
        let w = Wrench::new(0.0, 0.0, 1e5, 0.0, 0.0, 0.0);
        assert!(matches!(
            solve_deformation(&w, &p, &g),
            Err(SensorError::Saturation(_))
        ));
    }
}
