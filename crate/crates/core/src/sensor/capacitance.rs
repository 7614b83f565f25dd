//! Parallel-plate electrode models for the two CDC configurations.
//!
//! Normal mode: each quadrant's comb pair is tied together over a grounded
//! plane, so only the local gap matters. Shear mode: every comb electrode
//! is read alone over an alternating ground/shield pattern; lateral motion
//! trades overlap between the two electrodes of a pair, and the local gap
//! still scales both (the shear-mode cross-coupling).

use super::mechanics::PlateDisplacement;
use super::params::{SensorGeometry, EPS0};
use super::SensorError;

/// Local gap under each quadrant centroid [m].
pub fn quadrant_gaps(d: &PlateDisplacement, g: &SensorGeometry) -> Result<[f64; 4], SensorError> {
    let mut gaps = [0.0; 4];
    for (gap, (x, y)) in gaps.iter_mut().zip(g.quadrant_centroids()) {
        *gap = g.nominal_gap - (d.dz + d.theta_x * y - d.theta_y * x);
        if !(*gap > 0.0) {
            return Err(SensorError::Saturation(format!(
                "quadrant gap {gap:e} m is not positive"
            )));
        }
    }
    Ok(gaps)
}

/// Parallel-plate capacitance `ε0 εr A / d` [F].
pub fn parallel_plate(eps_r: f64, area: f64, gap: f64) -> f64 {
    EPS0 * eps_r * area / gap
}

/// Z1..Z4 [F]. Independent of `dx`, `dy` and `theta_z`.
pub fn normal_mode_capacitance(
    d: &PlateDisplacement,
    g: &SensorGeometry,
) -> Result<[f64; 4], SensorError> {
    let gaps = quadrant_gaps(d, g)?;
    let eps = g.effective_permittivity();
    Ok(gaps.map(|gap| parallel_plate(eps, g.normal_area, gap)))
}

/// Lateral displacement of each quadrant along its sensitive axis [m].
/// Quadrants 1 and 3 read x, quadrants 2 and 4 read y; the rotation
/// `theta_z` adds `theta_z × r` at the centroid.
pub fn quadrant_shifts(d: &PlateDisplacement, g: &SensorGeometry) -> [f64; 4] {
    let c = g.quadrant_centroids();
    let mut out = [0.0; 4];
    for (q, (x, y)) in c.into_iter().enumerate() {
        out[q] = if q % 2 == 0 {
            d.dx - d.theta_z * y
        } else {
            d.dy + d.theta_z * x
        };
    }
    out
}

/// X1..X4, Y1..Y4 [F]. Pairs are (X1, X2) in quadrant 1, (X3, X4) in
/// quadrant 3, (Y1, Y2) in quadrant 2 and (Y3, Y4) in quadrant 4; the first
/// electrode of a pair gains overlap under positive shift.
pub fn shear_mode_capacitance(
    d: &PlateDisplacement,
    g: &SensorGeometry,
) -> Result<[f64; 8], SensorError> {
    let gaps = quadrant_gaps(d, g)?;
    let shifts = quadrant_shifts(d, g);
    let eps = g.effective_permittivity();
    let half_pitch = 0.5 * g.finger_pitch;
    let mut out = [0.0; 8];
    // quadrant index -> first output slot
    const SLOT: [usize; 4] = [0, 4, 2, 6];
    for q in 0..4 {
        let delta = shifts[q];
        if delta.abs() >= half_pitch {
            return Err(SensorError::RangeExceeded(format!(
                "quadrant {} shift {delta:e} m exceeds half the finger pitch",
                q + 1
            )));
        }
        let ratio = delta / g.finger_pitch;
        let s = SLOT[q];
        out[s] = parallel_plate(eps, g.shear_area * (1.0 + ratio), gaps[q]);
        out[s + 1] = parallel_plate(eps, g.shear_area * (1.0 - ratio), gaps[q]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_value() {
        let c = parallel_plate(3.0, 1e-6, 127e-6);
        assert!((c / 0.2092e-12 - 1.0).abs() < 1e-3, "{c}");
    }

    #[test]
    fn halving_gap_doubles() {
        let a = parallel_plate(3.0, 1e-6, 127e-6);
        let b = parallel_plate(3.0, 1e-6, 63.5e-6);
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn normal_mode_ignores_lateral_motion() {
        let g = SensorGeometry::default();
        let base = PlateDisplacement {
            dz: 10e-6,
            theta_x: 1e-3,
            theta_y: -2e-4,
            ..Default::default()
        };
        let moved = PlateDisplacement {
            dx: 30e-6,
            dy: -12e-6,
            theta_z: 4e-3,
            ..base
        };
        assert_eq!(
            normal_mode_capacitance(&base, &g).unwrap(),
            normal_mode_capacitance(&moved, &g).unwrap()
        );
    }

    #[test]
    fn rest_shear_channels_equal() {
        let g = SensorGeometry::default();
        let c = shear_mode_capacitance(&PlateDisplacement::default(), &g).unwrap();
        let expect = parallel_plate(g.effective_permittivity(), g.shear_area, g.nominal_gap);
        assert!(c.iter().all(|v| *v == expect));
    }

    #[test]
    fn torsion_pattern_matches_hand_computation() {
        let g = SensorGeometry::default();
        let tz = 2e-3;
        let d = PlateDisplacement {
            theta_z: tz,
            ..Default::default()
        };
        let a = g.quadrant_radius * std::f64::consts::FRAC_1_SQRT_2;
        // θz × r at (±a, ±a), projected on each quadrant's axis
        let hand = [-tz * a, -tz * a, tz * a, tz * a];
        let got = quadrant_shifts(&d, &g);
        for (h, v) in hand.iter().zip(got) {
            assert!((h - v).abs() < 1e-18);
        }
        let c = shear_mode_capacitance(&d, &g).unwrap();
        assert!(c[0] < c[1]); // X1 < X2
        assert!(c[2] > c[3]); // X3 > X4
        assert!(c[4] < c[5]); // Y1 < Y2
        assert!(c[6] > c[7]); // Y3 > Y4
    }

    #[test]
    fn wraparound_rejected() {
        let g = SensorGeometry::default();
        let d = PlateDisplacement {
            dx: 0.6 * g.finger_pitch,
            ..Default::default()
        };
        assert!(matches!(
            shear_mode_capacitance(&d, &g),
            Err(SensorError::RangeExceeded(_))
        ));
    }

    #[test]
    fn closed_gap_is_saturation() {
        let g = SensorGeometry::default();
        let d = PlateDisplacement {
            dz: g.nominal_gap,
            ..Default::default()
        };
        assert!(matches!(
            normal_mode_capacitance(&d, &g),
            Err(SensorError::Saturation(_))
        ));
    }
}
