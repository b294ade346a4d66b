//! Core value types: vectors, samples, series, frames and rotations.
//!
//! The device→vehicle transform is carried as a single composed orthonormal
//! matrix. The vehicle frame is x forward, y left, z up.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard gravity in m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Orthonormality / determinant tolerance for [`Rotation`].
pub const ROTATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImuError {
    #[error("invalid rotation: {0}")]
    InvalidRotation(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("expected {expected} frame, got {actual}")]
    WrongFrame { expected: Frame, actual: Frame },
    #[error("timestamps must be strictly increasing (sample {index}: {prev} -> {next})")]
    NonMonotoneTimestamps { index: usize, prev: f64, next: f64 },
    #[error("empty series")]
    EmptySeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > f64::MIN_POSITIVE && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Angle between two non-zero vectors in radians, in [0, π].
    pub fn angle_to(self, o: Vec3) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
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
    fn mul(self, k: f64) -> Vec3 {
        self.scale(k)
    }
}

impl std::iter::Sum for Vec3 {
    fn sum<I: Iterator<Item = Vec3>>(iter: I) -> Vec3 {
        iter.fold(Vec3::ZERO, |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Device,
    Vehicle,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Device => f.write_str("device"),
            Frame::Vehicle => f.write_str("vehicle"),
        }
    }
}

/// One timestamped 6-axis reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Seconds.
    pub t: f64,
    /// Specific force in m/s².
    pub accel: Vec3,
    /// Angular velocity in rad/s.
    pub gyro: Vec3,
    pub frame: Frame,
}

impl ImuSample {
    pub fn new(t: f64, accel: Vec3, gyro: Vec3, frame: Frame) -> Self {
        Self { t, accel, gyro, frame }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.accel.is_finite() && self.gyro.is_finite()
    }

    /// Rotates both vectors, keeping the frame tag.
    pub fn rotated(&self, r: &Rotation) -> ImuSample {
        ImuSample { accel: r.rotate(self.accel), gyro: r.rotate(self.gyro), ..*self }
    }
}

/// Ordered samples sharing one frame, with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    samples: Vec<ImuSample>,
    frame: Frame,
}

impl SampleSeries {
    pub fn new(samples: Vec<ImuSample>, frame: Frame) -> Result<Self, ImuError> {
        for (i, s) in samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(ImuError::NonFinite("sample"));
            }
            if s.frame != frame {
                return Err(ImuError::WrongFrame { expected: frame, actual: s.frame });
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(ImuError::NonMonotoneTimestamps { index: i, prev: samples[i - 1].t, next: s.t });
            }
        }
        Ok(Self { samples, frame })
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<ImuSample> {
        self.samples
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time between first and last sample.
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Sub-series over an index range. Inherits ordering so cannot fail.
    pub fn slice(&self, range: std::ops::Range<usize>) -> SampleSeries {
        SampleSeries { samples: self.samples[range].to_vec(), frame: self.frame }
    }

    /// Applies `f` to every sample. `f` must keep timestamps and frame.
    pub(crate) fn map_samples(&self, f: impl FnMut(&ImuSample) -> ImuSample) -> SampleSeries {
        SampleSeries { samples: self.samples.iter().map(f).collect(), frame: self.frame }
    }

    /// Rotates every sample, keeping the frame tag.
    pub fn rotated(&self, r: &Rotation) -> SampleSeries {
        self.map_samples(|s| s.rotated(r))
    }
}

/// A proper rotation: orthonormal 3×3 matrix with determinant +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::from_array(a)
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl TryFrom<[[f64; 3]; 3]> for Rotation {
    type Error = ImuError;

    fn try_from(m: [[f64; 3]; 3]) -> Result<Self, ImuError> {
        Rotation::from_matrix(m)
    }
}

impl From<Rotation> for [[f64; 3]; 3] {
    fn from(r: Rotation) -> Self {
        r.matrix()
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };

    /// Validates orthonormality and determinant within [`ROTATION_TOLERANCE`].
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self, ImuError> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ImuError::InvalidRotation("non-finite entry".into()));
        }
        let r = Rotation { m };
        let p = r.mul(&r.transpose());
        for (i, row) in p.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (v - expect).abs() > ROTATION_TOLERANCE {
                    return Err(ImuError::InvalidRotation(format!("m·mᵀ[{i}][{j}] = {v}, not orthonormal")));
                }
            }
        }
        let det = r.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(ImuError::InvalidRotation(format!("determinant {det}")));
        }
        Ok(r)
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self, ImuError> {
        let k = axis.normalized().ok_or_else(|| ImuError::DegenerateInput("zero rotation axis".into()))?;
        if !angle.is_finite() {
            return Err(ImuError::NonFinite("angle"));
        }
        let (s, c) = angle.sin_cos();
        Ok(Self::rodrigues(k, s, c))
    }

    /// R = I + s·K + (1 − c)·K² for unit axis `k`.
    fn rodrigues(k: Vec3, s: f64, c: f64) -> Self {
        let t = 1.0 - c;
        let (x, y, z) = (k.x, k.y, k.z);
        Rotation {
            m: [
                [c + t * x * x, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, c + t * y * y, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, c + t * z * z],
            ],
        }
    }

    /// Standard rotation about the z-axis.
    pub fn about_z(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Rotation { m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]] }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn transpose(&self) -> Rotation {
        let m = &self.m;
        Rotation { m: [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]] }
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Rotation) -> Rotation {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Rotation { m: out }
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Rotation angle in radians, in [0, π].
    pub fn angle(&self) -> f64 {
        let m = &self.m;
        let tr = m[0][0] + m[1][1] + m[2][2];
        // sin from the skew part keeps precision near 0 and π
        let skew = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]);
        (0.5 * skew.norm()).atan2(0.5 * (tr - 1.0))
    }

    /// Angle of the relative rotation `self · otherᵀ`.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        self.mul(&other.transpose()).angle()
    }
}

/// Gravity magnitude in m/s². Defaults to [`STANDARD_GRAVITY`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gravity(pub f64);

impl Default for Gravity {
    fn default() -> Self {
        Gravity(STANDARD_GRAVITY)
    }
}

impl Gravity {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Transforms a device-frame sample into the vehicle frame.
pub fn apply_rotation(r: &Rotation, s: &ImuSample) -> Result<ImuSample, ImuError> {
    if s.frame != Frame::Device {
        return Err(ImuError::WrongFrame { expected: Frame::Device, actual: s.frame });
    }
    // re-validate: a Rotation can only be built valid, but products of many
    // valid rotations drift
    Rotation::from_matrix(r.m)?;
    Ok(ImuSample { frame: Frame::Vehicle, ..s.rotated(r) })
}

/// Transforms a whole device-frame series into the vehicle frame.
pub fn apply_rotation_series(r: &Rotation, series: &SampleSeries) -> Result<SampleSeries, ImuError> {
    if series.frame() != Frame::Device {
        return Err(ImuError::WrongFrame { expected: Frame::Device, actual: series.frame() });
    }
    Rotation::from_matrix(r.m)?;
    Ok(SampleSeries {
        samples: series.samples().iter().map(|s| ImuSample { frame: Frame::Vehicle, ..s.rotated(r) }).collect(),
        frame: Frame::Vehicle,
    })
}

/// Minimal rotation carrying the unit vector `v` onto +z.
///
/// The rotation axis is `v × ẑ` and the angle `arccos(v·ẑ)`. For `v = −ẑ`
/// the axis is undefined and a 180° rotation about x is returned.
pub fn rotation_aligning_to_z(v: Vec3) -> Result<Rotation, ImuError> {
    if !v.is_finite() {
        return Err(ImuError::NonFinite("vector"));
    }
    let n = v.norm();
    if (n - 1.0).abs() > 1e-6 {
        return Err(ImuError::DegenerateInput(format!("|v| = {n}, expected unit vector")));
    }
    let v = v.scale(1.0 / n);
    let axis = v.cross(Vec3::Z);
    let s = axis.norm();
    let c = v.z;
    if s == 0.0 {
        return Ok(if c > 0.0 {
            Rotation::IDENTITY
        } else {
            Rotation { m: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]] }
        });
    }
    Ok(Rotation::rodrigues(axis.scale(1.0 / s), s, c))
}

/// `Rz(−phi) · vertical`: the heading correction applied after vertical alignment.
pub fn compose_heading(vertical: &Rotation, phi: f64) -> Result<Rotation, ImuError> {
    if !phi.is_finite() {
        return Err(ImuError::NonFinite("heading"));
    }
    Rotation::from_matrix(vertical.m)?;
    Ok(Rotation::about_z(-phi).mul(vertical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use proptest::strategy::ValueTree;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn dev(t: f64, a: Vec3) -> ImuSample {
        ImuSample::new(t, a, Vec3::ZERO, Frame::Device)
    }

    fn unit_quat_rotation(w: f64, x: f64, y: f64, z: f64) -> Rotation {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Rotation::from_matrix([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ])
        .unwrap()
    }

    prop_compose! {
        fn arb_rotation()(w in -1.0..1.0f64, x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64)
            (r in Just((w, x, y, z)).prop_filter("non-zero", |q| q.0.abs() + q.1.abs() + q.2.abs() + q.3.abs() > 0.1))
            -> Rotation {
            unit_quat_rotation(r.0, r.1, r.2, r.3)
        }
    }

    prop_compose! {
        fn arb_unit()(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64)
            (v in Just(Vec3::new(x, y, z)).prop_filter("non-zero", |v| v.norm() > 0.05)) -> Vec3 {
            v.normalized().unwrap()
        }
    }

    #[test]
    fn identity_leaves_sample() {
        let s = apply_rotation(&Rotation::IDENTITY, &dev(0.0, Vec3::new(1.0, 2.0, 3.0))).unwrap();
        assert_eq!(s.accel, Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(s.frame, Frame::Vehicle);
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = Rotation::about_z(FRAC_PI_2);
        let s = apply_rotation(&r, &dev(1.5, Vec3::X)).unwrap();
        assert!(close(s.accel, Vec3::Y, 1e-12));
        assert_eq!(s.t, 1.5);
    }

    #[test]
    fn random_rotation_preserves_sqrt14() {
        let r = unit_quat_rotation(0.3, -0.7, 0.2, 0.5);
        let s = apply_rotation(&r, &dev(0.0, Vec3::new(1.0, 2.0, 3.0))).unwrap();
        assert!((s.accel.norm() - 14f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn vehicle_frame_input_rejected() {
        let s = ImuSample::new(0.0, Vec3::X, Vec3::ZERO, Frame::Vehicle);
        assert!(matches!(apply_rotation(&Rotation::IDENTITY, &s), Err(ImuError::WrongFrame { .. })));
    }

    #[test]
    fn from_matrix_rejects_reflection_and_shear() {
        let refl = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        assert!(matches!(Rotation::from_matrix(refl), Err(ImuError::InvalidRotation(_))));
        let shear = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(Rotation::from_matrix(shear).is_err());
    }

    #[test]
    fn align_z_cases() {
        assert_eq!(rotation_aligning_to_z(Vec3::Z).unwrap(), Rotation::IDENTITY);

        let r = rotation_aligning_to_z(Vec3::X).unwrap();
        assert!(close(r.rotate(Vec3::X), Vec3::Z, 1e-12));
        // minimal rotation: 90° about +y... axis x × z = −y, so a +90° turn about −y
        assert!((r.angle() - FRAC_PI_2).abs() < 1e-12);

        let v = Vec3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let r = rotation_aligning_to_z(v).unwrap();
        assert!(close(r.rotate(v), Vec3::Z, 1e-9));
        assert!((r.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn align_z_antipodal_is_half_turn_about_x() {
        let r = rotation_aligning_to_z(-Vec3::Z).unwrap();
        assert!(close(r.rotate(-Vec3::Z), Vec3::Z, 1e-15));
        assert!(close(r.rotate(Vec3::X), Vec3::X, 1e-15));
        assert!((r.angle() - PI).abs() < 1e-15);
    }

    #[test]
    fn align_z_near_antipodal_stays_accurate() {
        let v = Vec3::new(1e-9, -2e-9, -1.0).normalized().unwrap();
        let r = rotation_aligning_to_z(v).unwrap();
        assert!(close(r.rotate(v), Vec3::Z, 1e-12));
        Rotation::from_matrix(r.matrix()).unwrap();
    }

    #[test]
    fn align_z_rejects_non_unit() {
        assert!(matches!(rotation_aligning_to_z(Vec3::new(0.0, 0.0, 1.1)), Err(ImuError::DegenerateInput(_))));
        assert!(rotation_aligning_to_z(Vec3::new(0.0, 0.0, 1.0 + 5e-7)).is_ok());
    }

    #[test]
    fn compose_heading_examples() {
        assert_eq!(compose_heading(&Rotation::IDENTITY, 0.0).unwrap(), Rotation::IDENTITY);
        let r = compose_heading(&Rotation::IDENTITY, FRAC_PI_2).unwrap();
        assert!(close(r.rotate(Vec3::Y), Vec3::X, 1e-12));
    }

    #[test]
    fn series_rejects_bad_ordering() {
        let e = SampleSeries::new(vec![dev(1.0, Vec3::Z), dev(1.0, Vec3::Z)], Frame::Device);
        assert!(matches!(e, Err(ImuError::NonMonotoneTimestamps { index: 1, .. })));
        let e = SampleSeries::new(
            vec![dev(0.0, Vec3::Z), ImuSample::new(1.0, Vec3::Z, Vec3::ZERO, Frame::Vehicle)],
            Frame::Device,
        );
        assert!(matches!(e, Err(ImuError::WrongFrame { .. })));
        let e = SampleSeries::new(vec![dev(0.0, Vec3::new(f64::NAN, 0.0, 0.0))], Frame::Device);
        assert!(matches!(e, Err(ImuError::NonFinite(_))));
    }

    #[test]
    fn rotation_angle_matches_axis_angle() {
        for &a in &[0.0, 1e-8, 0.3, 2.0, PI - 1e-7, PI] {
            let r = Rotation::from_axis_angle(Vec3::new(0.2, -0.5, 0.8), a).unwrap();
            assert!((r.angle() - a).abs() < 1e-9, "{a}");
        }
    }

    proptest! {
        #[test]
        fn composition_is_closed(a in arb_rotation(), b in arb_rotation()) {
            prop_assert!(Rotation::from_matrix(a.mul(&b).matrix()).is_ok());
        }

        #[test]
        fn apply_preserves_norms_and_inverts(r in arb_rotation(),
                                             ax in -20.0..20.0f64, ay in -20.0..20.0f64, az in -20.0..20.0f64,
                                             gx in -3.0..3.0f64, gy in -3.0..3.0f64, gz in -3.0..3.0f64) {
            let s = ImuSample::new(2.0, Vec3::new(ax, ay, az), Vec3::new(gx, gy, gz), Frame::Device);
            let v = apply_rotation(&r, &s).unwrap();
            prop_assert!((v.accel.norm() - s.accel.norm()).abs() < 1e-9);
            prop_assert!((v.gyro.norm() - s.gyro.norm()).abs() < 1e-9);
            let back = apply_rotation(&r.transpose(), &ImuSample { frame: Frame::Device, ..v }).unwrap();
            prop_assert!(close(back.accel, s.accel, 1e-9 * 3f64.sqrt()));
            prop_assert!(close(back.gyro, s.gyro, 1e-9 * 3f64.sqrt()));
        }

        #[test]
        fn heading_composition_is_rotation(v in arb_rotation(), phi in -10.0..10.0f64) {
            let r = compose_heading(&v, phi).unwrap();
            prop_assert!(Rotation::from_matrix(r.matrix()).is_ok());
        }
    }

    #[test]
    fn align_z_on_many_random_units() {
        // deterministic sweep of 1000 directions, including the lower hemisphere
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        for _ in 0..1000 {
            let v = arb_unit().new_tree(&mut runner).unwrap().current();
            let r = rotation_aligning_to_z(v).unwrap();
            assert!(close(r.rotate(v), Vec3::Z, 1e-9), "{v:?}");
            Rotation::from_matrix(r.matrix()).unwrap();
        }
    }
}
