//! Shared data model: motion sequences, camera poses, and scalar grids.
//!
//! Every type validates its invariants at construction and is immutable
//! afterwards, so values can be shared freely across threads.

use crate::error::{Error, Result};

/// 3-vector used for joint positions and camera translations.
///
/// Units are opaque and only required to be consistent within one file or
/// stream (millimeters in metric contexts, model units in synthetic ones).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A joint position is just a 3-vector; the alias keeps call sites readable.
pub type Joint3 = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Unit quaternion, component order (x, y, z, w), Hamilton convention.
///
/// The (x, y, z, w) order is used at every serialization boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

/// Unit-norm tolerance enforced by constructors.
pub const QUAT_UNIT_TOL: f64 = 1e-9;

/// Loaders re-normalize quaternions whose norm deviates by less than this;
/// anything further off is rejected as corrupt.
pub const QUAT_LOAD_TOL: f64 = 1e-6;

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        w: 1.0,
    };

    /// Accepts components that are already unit within [`QUAT_UNIT_TOL`].
    pub fn new(x: f64, y: f64, z: f64, w: f64) -> Result<Self> {
        let q = Self { x, y, z, w };
        if !q.is_finite() {
            return Err(Error::Validation("non-finite quaternion".into()));
        }
        if (q.norm() - 1.0).abs() > QUAT_UNIT_TOL {
            return Err(Error::Validation(format!(
                "quaternion norm {} is not unit",
                q.norm()
            )));
        }
        Ok(q)
    }

    /// Normalizes arbitrary components; errors when the norm is ~0.
    pub fn normalized(x: f64, y: f64, z: f64, w: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z + w * w).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::Validation(format!(
                "cannot normalize quaternion with norm {n}"
            )));
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
            w: w / n,
        })
    }

    /// Loader rule: renormalize if the norm deviates by < [`QUAT_LOAD_TOL`],
    /// reject otherwise.
    pub fn from_stored(x: f64, y: f64, z: f64, w: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z + w * w).sqrt();
        if !n.is_finite() || (n - 1.0).abs() >= QUAT_LOAD_TOL {
            return Err(Error::Validation(format!(
                "stored quaternion norm {n} deviates from 1 by >= {QUAT_LOAD_TOL}"
            )));
        }
        Self::normalized(x, y, z, w)
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if n < 1e-12 || !n.is_finite() {
            return Err(Error::Validation("axis must be non-zero".into()));
        }
        let half = 0.5 * angle;
        let s = half.sin() / n;
        Self::normalized(axis.x * s, axis.y * s, axis.z * s, half.cos())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.w.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w).sqrt()
    }

    pub fn dot(&self, o: &Quaternion) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z + self.w * o.w
    }

    pub fn neg(&self) -> Quaternion {
        Quaternion {
            x: -self.x,
            y: -self.y,
            z: -self.z,
            w: -self.w,
        }
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion {
            x: -self.x,
            y: -self.y,
            z: -self.z,
            w: self.w,
        }
    }

    /// Hamilton product `self * rhs`.
    pub fn mul(&self, rhs: &Quaternion) -> Quaternion {
        Quaternion {
            x: self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            y: self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            z: self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
            w: self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
        }
    }

    /// Active rotation of `v` (Hamilton convention).
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let r = self.to_rotation_matrix();
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    /// Rotation by the inverse (conjugate for unit quaternions).
    pub fn rotate_inverse(&self, v: Vec3) -> Vec3 {
        self.conjugate().rotate(v)
    }

    pub fn to_rotation_matrix(&self) -> [[f64; 3]; 3] {
        let (x, y, z, w) = (self.x, self.y, self.z, self.w);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - z * w),
                2.0 * (x * z + y * w),
            ],
            [
                2.0 * (x * y + z * w),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - x * w),
            ],
            [
                2.0 * (x * z - y * w),
                2.0 * (y * z + x * w),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Rotation angle in [0, pi].
    pub fn angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }
}

/// Timestamped camera pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub frame_index: usize,
    pub translation: Vec3,
    pub rotation: Quaternion,
}

impl PoseSample {
    pub fn new(frame_index: usize, translation: Vec3, rotation: Quaternion) -> Result<Self> {
        if !translation.is_finite() {
            return Err(Error::Validation("non-finite translation".into()));
        }
        Ok(Self {
            frame_index,
            translation,
            rotation,
        })
    }

    pub fn identity(frame_index: usize) -> Self {
        Self {
            frame_index,
            translation: Vec3::ZERO,
            rotation: Quaternion::IDENTITY,
        }
    }
}

/// Ordered camera pose stream with a metric scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<PoseSample>,
    scale: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<PoseSample>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Validation(format!("scale {scale} must be > 0")));
        }
        for pair in samples.windows(2) {
            if pair[1].frame_index <= pair[0].frame_index {
                return Err(Error::Sequencing(format!(
                    "frame indices must be strictly increasing ({} then {})",
                    pair[0].frame_index, pair[1].frame_index
                )));
            }
        }
        Ok(Self { samples, scale })
    }

    pub fn samples(&self) -> &[PoseSample] {
        &self.samples
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// F x J joint positions with per-joint confidences.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    positions: Vec<Vec<Joint3>>,
    confidence: Vec<Vec<f64>>,
    frame_rate: f64,
}

impl MotionSequence {
    pub fn new(
        positions: Vec<Vec<Joint3>>,
        confidence: Vec<Vec<f64>>,
        frame_rate: f64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Schema("motion sequence needs at least 1 frame".into()));
        }
        let joints = positions[0].len();
        if joints == 0 {
            return Err(Error::Schema("motion sequence needs at least 1 joint".into()));
        }
        if positions.iter().any(|f| f.len() != joints) {
            return Err(Error::Schema(
                "all frames must have the same joint count".into(),
            ));
        }
        if confidence.len() != positions.len() || confidence.iter().any(|f| f.len() != joints) {
            return Err(Error::Schema(
                "confidence shape must match positions".into(),
            ));
        }
        if positions.iter().flatten().any(|p| !p.is_finite()) {
            return Err(Error::Validation("non-finite joint position".into()));
        }
        for c in confidence.iter().flatten() {
            if !(*c >= 0.0 && *c <= 1.0) {
                return Err(Error::Validation(format!(
                    "confidence {c} outside [0, 1]"
                )));
            }
        }
        if !(frame_rate > 0.0 && frame_rate.is_finite()) {
            return Err(Error::Validation(format!(
                "frame rate {frame_rate} must be > 0"
            )));
        }
        Ok(Self {
            positions,
            confidence,
            frame_rate,
        })
    }

    /// Builds a sequence with all confidences set to 1.
    pub fn from_positions(positions: Vec<Vec<Joint3>>, frame_rate: f64) -> Result<Self> {
        let confidence = positions.iter().map(|f| vec![1.0; f.len()]).collect();
        Self::new(positions, confidence, frame_rate)
    }

    pub fn frames(&self) -> usize {
        self.positions.len()
    }

    pub fn joints_per_frame(&self) -> usize {
        self.positions[0].len()
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn position(&self, frame: usize, joint: usize) -> Joint3 {
        self.positions[frame][joint]
    }

    pub fn confidence(&self, frame: usize, joint: usize) -> f64 {
        self.confidence[frame][joint]
    }

    pub fn frame_positions(&self, frame: usize) -> &[Joint3] {
        &self.positions[frame]
    }

    pub fn frame_confidence(&self, frame: usize) -> &[f64] {
        &self.confidence[frame]
    }
}

/// H x W scalar raster; masks additionally live in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation("grid dimensions must be >= 1".into()));
        }
        if values.len() != width * height {
            return Err(Error::Dimension(format!(
                "expected {}x{}={} values, got {}",
                width,
                height,
                width * height,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite grid value".into()));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every value is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn ensure_binary(&self, context: &str) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "{context}: grid values must be exactly 0 or 1"
            )))
        }
    }

    pub fn ensure_unit_range(&self, context: &str) -> Result<()> {
        if self.values.iter().all(|&v| (0.0..=1.0).contains(&v)) {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "{context}: grid values must lie in [0, 1]"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_unit_tolerance() {
        assert!(Quaternion::new(0.0, 0.0, 0.0, 1.0).is_ok());
        assert!(Quaternion::new(0.0, 0.0, 0.0, 1.0 + 1e-8).is_err());
        let q = Quaternion::normalized(1.0, 2.0, 3.0, 4.0).unwrap();
        assert!((q.norm() - 1.0).abs() <= QUAT_UNIT_TOL);
    }

    #[test]
    fn loader_rule_renormalizes_small_deviation_rejects_large() {
        // norm deviates by ~5e-7: renormalized
        let q = Quaternion::from_stored(0.0, 0.0, 0.0, 1.0 + 5e-7).unwrap();
        assert!((q.norm() - 1.0).abs() <= QUAT_UNIT_TOL);
        // norm 0.5: rejected, never silently fixed
        assert!(Quaternion::from_stored(0.0, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn rotation_matrix_matches_ninety_degree_example() {
        let q = Quaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2)
            .unwrap();
        let v = q.rotate(Vec3::new(1.0, 0.0, 0.0));
        assert!((v.x - 0.0).abs() < 1e-12);
        assert!((v.y - 1.0).abs() < 1e-12);
        assert!((v.z - 0.0).abs() < 1e-12);
    }

    #[test]
    fn rotate_inverse_undoes_rotate() {
        let q = Quaternion::normalized(0.3, -0.2, 0.9, 0.4).unwrap();
        let v = Vec3::new(1.5, -2.0, 0.25);
        let back = q.rotate_inverse(q.rotate(v));
        assert!((back - v).norm() < 1e-12);
    }

    #[test]
    fn trajectory_rejects_non_increasing_frames() {
        let a = PoseSample::identity(3);
        let b = PoseSample::identity(3);
        assert!(Trajectory::new(vec![a, b], 1.0).is_err());
        assert!(Trajectory::new(vec![a], 0.0).is_err());
    }

    #[test]
    fn motion_sequence_rejects_ragged_and_bad_confidence() {
        let p = vec![
            vec![Joint3::ZERO, Joint3::ZERO],
            vec![Joint3::ZERO],
        ];
        assert!(MotionSequence::from_positions(p, 30.0).is_err());

        let p = vec![vec![Joint3::ZERO]];
        let c = vec![vec![1.5]];
        assert!(MotionSequence::new(p, c, 30.0).is_err());

        // J = 0 violates the schema
        assert!(MotionSequence::from_positions(vec![vec![]], 30.0).is_err());
    }

    #[test]
    fn grid_constructors_validate() {
        assert!(ScalarGrid::new(0, 3, vec![]).is_err());
        assert!(ScalarGrid::new(2, 2, vec![1.0; 3]).is_err());
        assert!(ScalarGrid::new(2, 2, vec![f64::NAN; 4]).is_err());
        let g = ScalarGrid::from_fn(3, 2, |r, c| (r * 3 + c) as f64).unwrap();
        assert_eq!(g.at(1, 2), 5.0);
        assert_eq!(g.max_value(), 5.0);
    }
}
