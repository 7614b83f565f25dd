//! Shared value types: 3-vectors, unit quaternions and the 6-axis wrench.
//!
//! World frame is z-up. Moments are carried in mN·m everywhere; the only
//! place that converts to SI is the mechanics solver in [`crate::sensor`].

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cross products with a norm below this are treated as parallel inputs.
pub const EPS_PARALLEL: f64 = 1e-8;

/// Maximum accepted deviation of a quaternion norm from one.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// Standard gravity magnitude [m/s²].
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("quaternion norm {0} deviates from 1 by more than {UNIT_NORM_TOL}")]
    NonUnitQuaternion(f64),
    #[error("degenerate orientation: cross product norm {0:e} below {EPS_PARALLEL:e}")]
    DegenerateOrientation(f64),
    #[error("non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3×3 matrix, used for gain matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diagonal(d: [f64; 3]) -> Self {
        Mat3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self::diagonal([s; 3])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = &self.0;
        (m[0][1] - m[1][0]).abs() <= tol
            && (m[0][2] - m[2][0]).abs() <= tol
            && (m[1][2] - m[2][1]).abs() <= tol
    }

    /// Sylvester's criterion on the leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        let m = &self.0;
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        self.is_symmetric(1e-12) && d1 > 0.0 && d2 > 0.0 && d3 > 0.0
    }
}

/// Rotation stored as a unit quaternion (w, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes the raw components. Fails on zero or non-finite input.
    pub fn new_normalize(w: f64, x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < f64::EPSILON {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Accepts components that are already unit norm within [`UNIT_NORM_TOL`],
    /// then renormalizes them exactly.
    pub fn from_components(w: f64, x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(GeometryError::NonUnitQuaternion(n));
        }
        Self::new_normalize(w, x, y, z)
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self, GeometryError> {
        let n = axis.norm();
        if n < EPS_PARALLEL {
            return Ok(Self::IDENTITY);
        }
        let a = axis / n;
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new_normalize(c, a.x * s, a.y * s, a.z * s)
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Hamilton product `self * o`, renormalized.
    pub fn mul(&self, o: &UnitQuaternion) -> UnitQuaternion {
        let (a, b) = (self, o);
        let w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
        let x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y;
        let y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x;
        let z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w;
        // product of unit quaternions is never zero
        Self::new_normalize(w, x, y, z).unwrap_or(Self::IDENTITY)
    }

    /// Rotation matrix, row-major.
    pub fn to_rotation_matrix(&self) -> [[f64; 3]; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Builds the quaternion of an orthonormal right-handed basis given as
    /// the columns of the rotation matrix (Shepperd's method).
    pub fn from_basis(xb: Vec3, yb: Vec3, zb: Vec3) -> Result<Self, GeometryError> {
        let (m00, m01, m02) = (xb.x, yb.x, zb.x);
        let (m10, m11, m12) = (xb.y, yb.y, zb.y);
        let (m20, m21, m22) = (xb.z, yb.z, zb.z);
        let trace = m00 + m11 + m22;
        let (w, x, y, z) = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            (0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s)
        } else if m00 > m11 && m00 > m22 {
            let s = (1.0 + m00 - m11 - m22).sqrt() * 2.0;
            ((m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s)
        } else if m11 > m22 {
            let s = (1.0 + m11 - m00 - m22).sqrt() * 2.0;
            ((m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s)
        } else {
            let s = (1.0 + m22 - m00 - m11).sqrt() * 2.0;
            ((m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s)
        };
        let q = Self::new_normalize(w, x, y, z)?;
        // canonical hemisphere
        Ok(if q.w < 0.0 {
            Self {
                w: -q.w,
                x: -q.x,
                y: -q.y,
                z: -q.z,
            }
        } else {
            q
        })
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let r = self.to_rotation_matrix();
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    /// Rotation angle to `o` [rad], in [0, π].
    pub fn angle_to(&self, o: &UnitQuaternion) -> f64 {
        let d = (self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z).abs();
        2.0 * d.min(1.0).acos()
    }

    /// Spherical interpolation along the shorter arc; `t = 0` gives `self`.
    pub fn slerp(&self, o: &UnitQuaternion, t: f64) -> UnitQuaternion {
        let mut d = self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z;
        let mut b = *o;
        if d < 0.0 {
            d = -d;
            b = Self {
                w: -o.w,
                x: -o.x,
                y: -o.y,
                z: -o.z,
            };
        }
        let (s0, s1) = if d > 0.9995 {
            (1.0 - t, t)
        } else {
            let theta = d.acos();
            let s = theta.sin();
            (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
        };
        Self::new_normalize(
            s0 * self.w + s1 * b.w,
            s0 * self.x + s1 * b.x,
            s0 * self.y + s1 * b.y,
            s0 * self.z + s1 * b.z,
        )
        .unwrap_or(*self)
    }
}

/// Columns of the rotation matrix of `q`: the body x, y and z axes
/// expressed in the world frame.
pub fn quat_to_basis(q: &UnitQuaternion) -> Result<(Vec3, Vec3, Vec3), GeometryError> {
    let n = q.norm();
    if !n.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(GeometryError::NonUnitQuaternion(n));
    }
    let r = q.to_rotation_matrix();
    Ok((
        Vec3::new(r[0][0], r[1][0], r[2][0]),
        Vec3::new(r[0][1], r[1][1], r[2][1]),
        Vec3::new(r[0][2], r[1][2], r[2][2]),
    ))
}

/// `(a × b) / ‖a × b‖`.
pub fn cross_normalize(a: Vec3, b: Vec3) -> Result<Vec3, GeometryError> {
    let c = a.cross(b);
    let n = c.norm();
    if !n.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if n <= EPS_PARALLEL {
        return Err(GeometryError::DegenerateOrientation(n));
    }
    Ok(c / n)
}

/// Six-axis load: forces in N, moments in mN·m.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

/// Axis labels in wrench order.
pub const AXES: [&str; 6] = ["Fx", "Fy", "Fz", "Mx", "My", "Mz"];

impl Wrench {
    pub const ZERO: Wrench = Wrench {
        fx: 0.0,
        fy: 0.0,
        fz: 0.0,
        mx: 0.0,
        my: 0.0,
        mz: 0.0,
    };

    pub const fn new(fx: f64, fy: f64, fz: f64, mx: f64, my: f64, mz: f64) -> Self {
        Self {
            fx,
            fy,
            fz,
            mx,
            my,
            mz,
        }
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.fx, self.fy, self.fz, self.mx, self.my, self.mz]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn force(&self) -> Vec3 {
        Vec3::new(self.fx, self.fy, self.fz)
    }

    pub fn scale(&self, s: f64) -> Self {
        let a = self.to_array().map(|v| v * s);
        Self::from_array(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_basis() {
        let (x, y, z) = quat_to_basis(&UnitQuaternion::IDENTITY).unwrap();
        assert_eq!(x, Vec3::X);
        assert_eq!(y, Vec3::Y);
        assert_eq!(z, Vec3::Z);
    }

    #[test]
    fn quarter_turn_about_z() {
        let q = UnitQuaternion::from_axis_angle(Vec3::Z, std::f64::consts::FRAC_PI_2).unwrap();
        let (x, y, _) = quat_to_basis(&q).unwrap();
        assert!(close(x, Vec3::Y, 1e-12));
        assert!(close(y, -Vec3::X, 1e-12));
    }

    #[test]
    fn rejects_non_unit() {
        let q = UnitQuaternion {
            w: 1.1,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        };
        assert!(matches!(
            quat_to_basis(&q),
            Err(GeometryError::NonUnitQuaternion(_))
        ));
        assert!(UnitQuaternion::from_components(1.0 + 1e-7, 0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn cross_normalize_cases() {
        assert!(close(
            cross_normalize(Vec3::Z, Vec3::X).unwrap(),
            Vec3::Y,
            1e-15
        ));
        assert!(matches!(
            cross_normalize(Vec3::Z, Vec3::Z),
            Err(GeometryError::DegenerateOrientation(_))
        ));
        let got = cross_normalize(Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 2.0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(got, Vec3::new(h, -h, 0.0), 1e-15));
    }

    #[test]
    fn basis_round_trip() {
        let q = UnitQuaternion::new_normalize(0.3, -0.5, 0.7, 0.1).unwrap();
        let (x, y, z) = quat_to_basis(&q).unwrap();
        let back = UnitQuaternion::from_basis(x, y, z).unwrap();
        assert!(q.angle_to(&back) < 1e-12);
    }

    #[test]
    fn slerp_endpoints() {
        let a = UnitQuaternion::IDENTITY;
        let b = UnitQuaternion::from_axis_angle(Vec3::X, 0.4).unwrap();
        assert!(a.slerp(&b, 0.0).angle_to(&a) < 1e-12);
        assert!(a.slerp(&b, 1.0).angle_to(&b) < 1e-12);
        assert!((a.slerp(&b, 0.5).angle_to(&a) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn pd_check() {
        assert!(Mat3::scaled_identity(2.0).is_positive_definite());
        assert!(!Mat3::diagonal([1.0, -1.0, 1.0]).is_positive_definite());
    }
}
