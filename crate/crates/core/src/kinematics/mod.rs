//! Kinematic model of the 4-DOF palletizing arm.
//!
//! Link angles follow the palletizing (parallelogram) convention: θ2, θ3 and
//! θ4 are measured from the horizontal, not accumulated along the chain. The
//! D-H table keeps the link constants and lets [`Manipulator::dh_chain`]
//! rebuild the same pose from standard D-H transforms.

mod workspace;

pub use workspace::{KeyPoint, KeyPointCheck, WorkspaceCurve, WorkspaceOptions, WorkspaceSummary};

use crate::math::wrap_angle;
use nalgebra::{Matrix4, Vector4};
use std::f64::consts::PI;
use thiserror::Error;

/// Angle-slot marker of a D-H row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSlot {
    /// Driven by joint `1..=4`.
    Variable(usize),
    /// Held at zero (measured from the horizontal).
    Fixed,
}

/// One row of the D-H table. Lengths in mm, twist in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta: ThetaSlot,
}

impl DhRow {
    pub fn new(a: f64, alpha: f64, d: f64, theta: ThetaSlot) -> Self {
        Self { a, alpha, d, theta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DhTable {
    pub rows: [DhRow; 5],
}

impl Default for DhTable {
    fn default() -> Self {
        let deg = PI / 180.0;
        Self {
            rows: [
                DhRow::new(100.0, 90.0 * deg, 185.0, ThetaSlot::Variable(1)),
                DhRow::new(1000.0, 0.0, 0.0, ThetaSlot::Variable(2)),
                DhRow::new(1700.0, 0.0, 0.0, ThetaSlot::Variable(3)),
                DhRow::new(100.0, 0.0, 0.0, ThetaSlot::Fixed),
                DhRow::new(80.0, 0.0, 0.0, ThetaSlot::Variable(4)),
            ],
        }
    }
}

impl DhTable {
    /// Builds a table from link lengths `a` (mm), base offset `d1` (mm) and
    /// base twist `alpha1` (rad); the slot pattern is the palletizing one.
    pub fn from_constants(a: [f64; 5], d1: f64, alpha1: f64) -> Self {
        let mut t = Self::default();
        for (row, &len) in t.rows.iter_mut().zip(a.iter()) {
            row.a = len;
        }
        t.rows[0].d = d1;
        t.rows[0].alpha = alpha1;
        t
    }

    pub fn validate(&self) -> Result<(), String> {
        for (i, row) in self.rows.iter().enumerate() {
            if !(row.a.is_finite() && row.d.is_finite() && row.alpha.is_finite()) {
                return Err(format!("row {} has non-finite entries", i + 1));
            }
            if row.a < 0.0 || row.d < 0.0 {
                return Err(format!("row {}: a and d must be non-negative", i + 1));
            }
        }
        if self.rows[3].theta != ThetaSlot::Fixed {
            return Err("row 4 must have a fixed zero joint angle".into());
        }
        let expected = [1, 2, 3, 0, 4];
        for (row, &j) in self.rows.iter().zip(expected.iter()) {
            let ok = match row.theta {
                ThetaSlot::Variable(v) => v == j,
                ThetaSlot::Fixed => j == 0,
            };
            if !ok {
                return Err("joint slots must be [θ1, θ2, θ3, 0, θ4]".into());
            }
        }
        if self.rows[1].a <= 0.0 || self.rows[2].a <= 0.0 {
            return Err("links 2 and 3 must have positive length".into());
        }
        Ok(())
    }

    pub fn a(&self, i: usize) -> f64 {
        self.rows[i - 1].a
    }

    pub fn d1(&self) -> f64 {
        self.rows[0].d
    }
}

/// Standard D-H transform `Rot_z(θ)·Trans_z(d)·Trans_x(a)·Rot_x(α)`.
pub fn dh_transform(row: &DhRow, theta: f64) -> Matrix4<f64> {
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    Matrix4::new(
        ct,
        -st * ca,
        st * sa,
        row.a * ct,
        st,
        ct * ca,
        -ct * sa,
        row.a * st,
        0.0,
        sa,
        ca,
        row.d,
        0.0,
        0.0,
        0.0,
        1.0,
    )
}

/// Manipulator configuration, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
}

/// Joint-space vector (angles, rates, accelerations or torques).
pub type JointVector = Vector4<f64>;

impl JointAngles {
    pub fn new(theta1: f64, theta2: f64, theta3: f64, theta4: f64) -> Self {
        Self {
            theta1,
            theta2,
            theta3,
            theta4,
        }
    }

    pub fn from_degrees(d: [f64; 4]) -> Self {
        Self::new(
            d[0].to_radians(),
            d[1].to_radians(),
            d[2].to_radians(),
            d[3].to_radians(),
        )
    }

    pub fn to_degrees(self) -> [f64; 4] {
        [
            self.theta1.to_degrees(),
            self.theta2.to_degrees(),
            self.theta3.to_degrees(),
            self.theta4.to_degrees(),
        ]
    }

    pub fn as_vector(&self) -> JointVector {
        JointVector::new(self.theta1, self.theta2, self.theta3, self.theta4)
    }

    pub fn from_vector(v: &JointVector) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// Angle between links 2 and 3 at the elbow.
    pub fn interior_angle(&self) -> f64 {
        PI - (self.theta2 - self.theta3)
    }
}

/// Tool-point offset along the y-axis of the last frame, mm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ToolOffset {
    pub y5p: f64,
}

impl ToolOffset {
    pub fn new(y5p: f64) -> Self {
        Self { y5p }
    }
}

/// Tool pose: position in mm, orientation `phi` in rad (θ4 = −φ).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EndEffectorPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub phi: f64,
}

impl EndEffectorPose {
    pub fn new(x: f64, y: f64, z: f64, phi: f64) -> Self {
        Self { x, y, z, phi }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Which constraint a configuration broke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitViolation {
    /// Joint `index` (1-based) outside `[min, max]`, all rad.
    Joint {
        index: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    /// Elbow interior angle outside `[min, max]`, rad.
    Interior { value: f64, min: f64, max: f64 },
}

impl std::fmt::Display for LimitViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            LimitViolation::Joint {
                index,
                value,
                min,
                max,
            } => write!(
                f,
                "joint {} at {:.4}° outside [{:.1}°, {:.1}°]",
                index,
                value.to_degrees(),
                min.to_degrees(),
                max.to_degrees()
            ),
            LimitViolation::Interior { value, min, max } => write!(
                f,
                "elbow interior angle {:.4}° outside [{:.1}°, {:.1}°]",
                value.to_degrees(),
                min.to_degrees(),
                max.to_degrees()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    /// No real solution: the law-of-cosines argument left [-1, 1].
    #[error("target unreachable (cosine argument {cosine:.6})")]
    Unreachable { cosine: f64 },
    /// A solution exists but breaks the operating ranges.
    #[error("joint limit violation: {0}")]
    JointLimitViolation(LimitViolation),
}

/// Operating ranges, rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub min: [f64; 4],
    pub max: [f64; 4],
    pub interior_min: f64,
    pub interior_max: f64,
}

impl Default for JointLimits {
    fn default() -> Self {
        let deg = PI / 180.0;
        Self {
            min: [-180.0 * deg, 0.0, -120.0 * deg, -90.0 * deg],
            max: [180.0 * deg, 135.0 * deg, 15.5 * deg, 0.0],
            interior_min: 30.0 * deg,
            interior_max: 165.0 * deg,
        }
    }
}

/// Slack on limit checks so that round-off at a boundary is not a violation.
pub const LIMIT_TOLERANCE: f64 = 1e-9;

impl JointLimits {
    pub fn check(&self, q: &JointAngles) -> Result<(), LimitViolation> {
        let v = [wrap_angle(q.theta1), q.theta2, q.theta3, q.theta4];
        for i in 0..4 {
            if v[i] < self.min[i] - LIMIT_TOLERANCE || v[i] > self.max[i] + LIMIT_TOLERANCE {
                return Err(LimitViolation::Joint {
                    index: i + 1,
                    value: v[i],
                    min: self.min[i],
                    max: self.max[i],
                });
            }
        }
        let interior = q.interior_angle();
        if interior < self.interior_min - LIMIT_TOLERANCE
            || interior > self.interior_max + LIMIT_TOLERANCE
        {
            return Err(LimitViolation::Interior {
                value: interior,
                min: self.interior_min,
                max: self.interior_max,
            });
        }
        Ok(())
    }

    pub fn contains(&self, q: &JointAngles) -> bool {
        self.check(q).is_ok()
    }

    /// Smallest distance (rad) from `q` to any limit; negative when outside.
    pub fn margin(&self, q: &JointAngles) -> f64 {
        let v = [q.theta1, q.theta2, q.theta3, q.theta4];
        let mut m = f64::INFINITY;
        for i in 1..4 {
            m = m.min(v[i] - self.min[i]).min(self.max[i] - v[i]);
        }
        let interior = q.interior_angle();
        m.min(interior - self.interior_min)
            .min(self.interior_max - interior)
    }

    pub fn validate(&self) -> Result<(), String> {
        for i in 0..4 {
            if !(self.min[i] < self.max[i]) {
                return Err(format!("joint {} range is empty", i + 1));
            }
        }
        if !(self.interior_min < self.interior_max) {
            return Err("interior angle range is empty".into());
        }
        Ok(())
    }
}

/// Whether `forward_kinematics` enforces the operating ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitCheck {
    Enforce,
    Bypass,
}

/// Link constants plus operating ranges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manipulator {
    pub dh: DhTable,
    pub limits: JointLimits,
}

impl Manipulator {
    pub fn new(dh: DhTable, limits: JointLimits) -> Self {
        Self { dh, limits }
    }

    /// Radial distance and height of the tool in the arm plane.
    pub fn planar_tool(&self, q: &JointAngles, tool: ToolOffset) -> (f64, f64) {
        let (s2, c2) = q.theta2.sin_cos();
        let (s3, c3) = q.theta3.sin_cos();
        let (s4, c4) = q.theta4.sin_cos();
        let a = |i| self.dh.a(i);
        let r = a(1) + a(2) * c2 + a(3) * c3 + a(4) + a(5) * c4 - tool.y5p * s4;
        let z = self.dh.d1() + a(2) * s2 + a(3) * s3 + a(5) * s4 + tool.y5p * c4;
        (r, z)
    }

    pub fn forward_kinematics(
        &self,
        q: &JointAngles,
        tool: ToolOffset,
        check: LimitCheck,
    ) -> Result<EndEffectorPose, KinematicsError> {
        if check == LimitCheck::Enforce {
            self.limits
                .check(q)
                .map_err(KinematicsError::JointLimitViolation)?;
        }
        let (r, z) = self.planar_tool(q, tool);
        let (s1, c1) = q.theta1.sin_cos();
        Ok(EndEffectorPose {
            x: r * c1,
            y: r * s1,
            z,
            phi: -q.theta4,
        })
    }

    /// Closed-form inverse with the elbow branch fixed (+acos for θ2, −acos
    /// for θ3).
    pub fn inverse_kinematics(
        &self,
        pose: &EndEffectorPose,
        tool: ToolOffset,
    ) -> Result<JointAngles, KinematicsError> {
        let q = self.solve_unchecked(pose, tool)?;
        self.limits
            .check(&q)
            .map_err(KinematicsError::JointLimitViolation)?;
        Ok(q)
    }

    /// Geometric solution without range checks.
    pub fn solve_unchecked(
        &self,
        pose: &EndEffectorPose,
        tool: ToolOffset,
    ) -> Result<JointAngles, KinematicsError> {
        let a = |i| self.dh.a(i);
        let theta1 = pose.y.atan2(pose.x);
        let theta4 = -pose.phi;
        let (s4, c4) = theta4.sin_cos();
        let dr3 = pose.radius() - a(1);
        let dz3 = pose.z - self.dh.d1();
        let dr2 = dr3 + tool.y5p * s4 - a(4) - a(5) * c4;
        let dz2 = dz3 - a(5) * s4 - tool.y5p * c4;
        let dist = dr2.hypot(dz2);
        if !(dist > 0.0) {
            return Err(KinematicsError::Unreachable {
                cosine: f64::INFINITY,
            });
        }
        let (a2, a3) = (a(2), a(3));
        let k2 = (dist * dist + a2 * a2 - a3 * a3) / (2.0 * a2 * dist);
        let k3 = (dist * dist + a3 * a3 - a2 * a2) / (2.0 * a3 * dist);
        let k2 = clamp_cosine(k2)?;
        let k3 = clamp_cosine(k3)?;
        let bearing = dz2.atan2(dr2);
        Ok(JointAngles {
            theta1,
            theta2: k2.acos() + bearing,
            theta3: -k3.acos() + bearing,
            theta4,
        })
    }

    /// Tool point rebuilt from the D-H chain. Absolute table angles are
    /// turned into per-row increments, so the fixed fourth row keeps link 4
    /// horizontal.
    pub fn dh_chain(&self, q: &JointAngles, tool: ToolOffset) -> Vector4<f64> {
        self.dh_chain_transform(q) * Vector4::new(0.0, tool.y5p, 0.0, 1.0)
    }

    pub fn dh_chain_transform(&self, q: &JointAngles) -> Matrix4<f64> {
        let joint = |slot: ThetaSlot| match slot {
            ThetaSlot::Variable(1) => q.theta1,
            ThetaSlot::Variable(2) => q.theta2,
            ThetaSlot::Variable(3) => q.theta3,
            ThetaSlot::Variable(4) => q.theta4,
            _ => 0.0,
        };
        let mut t = dh_transform(&self.dh.rows[0], joint(self.dh.rows[0].theta));
        let mut previous = 0.0;
        for row in &self.dh.rows[1..] {
            let absolute = joint(row.theta);
            t *= dh_transform(row, absolute - previous);
            previous = absolute;
        }
        t
    }

    /// Whether a global point is reachable for some tool pitch in
    /// `[0°, 90°]`, sampled every `step` rad.
    pub fn reaches(&self, x: f64, y: f64, z: f64, tool: ToolOffset, step: f64) -> bool {
        self.best_pitch(x, y, z, tool, step).is_some()
    }

    /// Reachable tool pitch with the largest limit margin, if any.
    pub fn best_pitch(
        &self,
        x: f64,
        y: f64,
        z: f64,
        tool: ToolOffset,
        step: f64,
    ) -> Option<(JointAngles, f64)> {
        let phi_max = -self.limits.min[3];
        let phi_min = -self.limits.max[3];
        let n = ((phi_max - phi_min) / step).ceil().max(1.0) as usize;
        let mut best: Option<(JointAngles, f64)> = None;
        for k in 0..=n {
            let phi = (phi_min + k as f64 * step).min(phi_max);
            if let Ok(q) = self.inverse_kinematics(&EndEffectorPose::new(x, y, z, phi), tool) {
                let m = self.limits.margin(&q);
                if best.is_none_or(|(_, bm)| m > bm) {
                    best = Some((q, m));
                }
            }
        }
        best
    }
}

fn clamp_cosine(k: f64) -> Result<f64, KinematicsError> {
    const SLACK: f64 = 1e-12;
    if !k.is_finite() || k.abs() > 1.0 + SLACK {
        return Err(KinematicsError::Unreachable { cosine: k });
    }
    Ok(k.clamp(-1.0, 1.0))
}
