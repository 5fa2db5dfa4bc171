//! Rounded-square chassis circuit around the fire test.
//!
//! The circuit is driven anticlockwise. Straight `k` (1..=4) has heading
//! `(k − 1)·90°`; straight 1 runs along the bottom in +x. An *edge* is the
//! path from the midpoint `K_k` of straight `k` to the midpoint `K_{k+1}` of
//! the next straight, so it holds half of each straight and one corner arc.
//! `A_{2k−1}` and `A_{2k}` are the start and end tangency points of
//! straight `k`.

use super::MissionError;
use crate::chassis_control::{ChassisReferenceSample, ChassisState, ChassisTrajectory, ChassisVelocity};
use crate::math::wrap_angle;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    /// Centre of the circuit (and of the crib), m.
    pub center: [f64; 2],
    /// Path length from one K point to the next, m.
    pub edge_length: f64,
    pub corner_radius: f64,
    /// Chassis speed, m/s.
    pub speed: f64,
    /// Smallest corner radius accepted, m.
    pub min_radius: f64,
}

impl Default for CircuitSpec {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            edge_length: 0.88 * 2.956,
            corner_radius: 0.4,
            speed: 0.88,
            min_radius: 0.2,
        }
    }
}

/// Named point on the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub label: String,
    /// Path parameter from `K1`, in `[0, lap)`, m.
    pub s: f64,
    pub pose: ChassisState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub spec: CircuitSpec,
    /// Length of each straight, m.
    pub straight: f64,
    /// Distance from the centre to each straight, m.
    pub half_side: f64,
}

pub fn build_circuit(spec: CircuitSpec) -> Result<Circuit, MissionError> {
    Circuit::new(spec)
}

impl Circuit {
    pub fn new(spec: CircuitSpec) -> Result<Self, MissionError> {
        let bad = |m: &str| Err(MissionError::GeometryError(m.to_string()));
        if !(spec.center.iter().all(|c| c.is_finite())) {
            return bad("centre must be finite");
        }
        if !(spec.speed > 0.0 && spec.speed.is_finite()) {
            return bad("speed must be positive");
        }
        if !(spec.corner_radius.is_finite() && spec.corner_radius >= spec.min_radius) {
            return bad(&format!(
                "corner radius {} below the minimum {}",
                spec.corner_radius, spec.min_radius
            ));
        }
        let straight = spec.edge_length - FRAC_PI_2 * spec.corner_radius;
        if !(straight > 0.0 && straight.is_finite()) {
            return bad("edge length too short for the corner arc");
        }
        Ok(Self {
            half_side: 0.5 * straight + spec.corner_radius,
            straight,
            spec,
        })
    }

    pub fn edge_length(&self) -> f64 {
        self.spec.edge_length
    }

    pub fn lap_length(&self) -> f64 {
        4.0 * self.spec.edge_length
    }

    /// Time to drive one edge at the circuit speed, s.
    pub fn edge_time(&self) -> f64 {
        self.spec.edge_length / self.spec.speed
    }

    /// Edge-frame rotation of straight `k` (1-based).
    pub fn straight_heading(k: usize) -> f64 {
        (k as f64 - 1.0) * FRAC_PI_2
    }

    fn to_global(&self, edge: usize, local: [f64; 2], heading: f64) -> ChassisState {
        let psi = Self::straight_heading(edge + 1);
        let (s, c) = psi.sin_cos();
        ChassisState::new(
            self.spec.center[0] + c * local[0] - s * local[1],
            self.spec.center[1] + s * local[0] + c * local[1],
            wrap_angle(heading + psi),
        )
    }

    /// Global point from coordinates in the frame of straight `k`.
    pub fn straight_frame_to_global(&self, k: usize, local: [f64; 2]) -> [f64; 2] {
        let p = self.to_global(k - 1, local, 0.0);
        [p.x, p.y]
    }

    /// Coordinates of a global point in the frame of straight `k`.
    pub fn global_to_straight_frame(&self, k: usize, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = Self::straight_heading(k).sin_cos();
        let dx = p[0] - self.spec.center[0];
        let dy = p[1] - self.spec.center[1];
        [c * dx + s * dy, -s * dx + c * dy]
    }

    /// Pose and curvature at path parameter `s` (any real value; wraps).
    pub fn pose_at(&self, s: f64) -> (ChassisState, f64) {
        let e = self.spec.edge_length;
        let r = self.spec.corner_radius;
        let half = 0.5 * self.straight;
        let arc = FRAC_PI_2 * r;
        let s = s.rem_euclid(self.lap_length());
        let edge = ((s / e).floor() as usize).min(3);
        let u = s - edge as f64 * e;
        if u <= half {
            (self.to_global(edge, [u, -self.half_side], 0.0), 0.0)
        } else if u <= half + arc {
            let a = (u - half) / r;
            let local = [half + r * a.sin(), -half - r * a.cos()];
            (self.to_global(edge, local, a), 1.0 / r)
        } else {
            let local = [self.half_side, -half + (u - half - arc)];
            (self.to_global(edge, local, FRAC_PI_2), 0.0)
        }
    }

    /// Reference sample at path parameter `s` with path speed `sd` and
    /// acceleration `sdd`.
    pub fn sample_at(&self, s: f64, sd: f64, sdd: f64) -> ChassisReferenceSample {
        let (pose, kappa) = self.pose_at(s);
        ChassisReferenceSample {
            pose,
            vel: ChassisVelocity::new(sd, sd * kappa),
            acc: ChassisVelocity::new(sdd, sdd * kappa),
        }
    }

    /// `K1..K5`; `K5` closes the lap at `K1`'s position.
    pub fn k_points(&self) -> Vec<PathPoint> {
        (0..5)
            .map(|i| {
                let s = (i % 4) as f64 * self.spec.edge_length;
                PathPoint {
                    label: format!("K{}", i + 1),
                    s: if i == 4 { self.lap_length() } else { s },
                    pose: self.pose_at(s).0,
                }
            })
            .collect()
    }

    /// Path parameter of a point `along` metres from the midpoint of
    /// straight `k`, wrapped into `[0, lap)`.
    pub fn straight_parameter(&self, k: usize, along: f64) -> f64 {
        ((k as f64 - 1.0) * self.spec.edge_length + along).rem_euclid(self.lap_length())
    }

    /// `A1..A8` in anticlockwise order.
    pub fn a_points(&self) -> Vec<PathPoint> {
        let half = 0.5 * self.straight;
        (1..=8usize)
            .map(|i| {
                let k = i.div_ceil(2);
                let along = if i % 2 == 1 { -half } else { half };
                let s = self.straight_parameter(k, along);
                PathPoint {
                    label: format!("A{i}"),
                    s,
                    pose: self.pose_at(s).0,
                }
            })
            .collect()
    }

    /// Endpoints of straight `k` in the global frame.
    pub fn straight_segment(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        let half = 0.5 * self.straight;
        (
            self.straight_frame_to_global(k, [-half, -self.half_side]),
            self.straight_frame_to_global(k, [half, -self.half_side]),
        )
    }
}

/// Constant-speed lap starting at `K1` when `t = 0`.
impl ChassisTrajectory for Circuit {
    fn sample(&self, t: f64) -> ChassisReferenceSample {
        let v = self.spec.speed;
        self.sample_at(v * t, v, 0.0)
    }
}

/// Constant-acceleration piece of a path-speed profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePiece {
    pub t0: f64,
    pub t1: f64,
    pub s0: f64,
    pub v0: f64,
    pub a: f64,
}

impl ProfilePiece {
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let tau = t - self.t0;
        (
            self.s0 + self.v0 * tau + 0.5 * self.a * tau * tau,
            self.v0 + self.a * tau,
            self.a,
        )
    }

    pub fn end(&self) -> (f64, f64) {
        let (s, v, _) = self.eval(self.t1);
        (s, v)
    }
}

/// Piecewise constant-acceleration path-parameter profile.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpeedProfile {
    pub pieces: Vec<ProfilePiece>,
}

impl SpeedProfile {
    pub fn end_time(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.t1)
    }

    pub fn end_state(&self) -> (f64, f64) {
        self.pieces.last().map_or((0.0, 0.0), |p| p.end())
    }

    pub fn push(&mut self, duration: f64, a: f64) {
        if duration <= 0.0 {
            return;
        }
        let t0 = self.end_time();
        let (s0, v0) = self.end_state();
        self.pieces.push(ProfilePiece {
            t0,
            t1: t0 + duration,
            s0,
            v0,
            a,
        });
    }

    /// Path parameter, speed and acceleration at `t`; constant extrapolation
    /// outside the profile.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let Some(first) = self.pieces.first() else {
            return (0.0, 0.0, 0.0);
        };
        if t <= first.t0 {
            return (first.s0, first.v0, 0.0);
        }
        let idx = self.pieces.partition_point(|p| p.t1 < t);
        match self.pieces.get(idx) {
            Some(p) => p.eval(t),
            None => {
                let last = self.pieces.last().expect("non-empty");
                let (s, v) = last.end();
                (s + v * (t - last.t1), v, 0.0)
            }
        }
    }

    /// Appends a drive from the current state that ends at rest after
    /// `distance` metres, cruising at most at `v_cruise` with acceleration
    /// bounded by `a_max`. Returns the deceleration used for braking.
    pub fn push_drive(&mut self, distance: f64, v_cruise: f64, a_max: f64) -> f64 {
        let (_, v0) = self.end_state();
        let v0 = v0.max(0.0);
        let distance = distance.max(0.0);
        let brake_min = v0 * v0 / (2.0 * a_max);
        if distance <= brake_min {
            if v0 > 0.0 && distance > 0.0 {
                let a = v0 * v0 / (2.0 * distance);
                self.push(v0 / a, -a);
                return a;
            }
            return if v0 > 0.0 { f64::INFINITY } else { 0.0 };
        }
        let vc = v_cruise.max(v0);
        let full = (vc * vc - v0 * v0) / (2.0 * a_max) + vc * vc / (2.0 * a_max);
        let peak = if distance >= full {
            vc
        } else {
            ((2.0 * a_max * distance + v0 * v0) / 2.0).sqrt()
        };
        let accel_d = (peak * peak - v0 * v0) / (2.0 * a_max);
        let brake_d = peak * peak / (2.0 * a_max);
        let cruise_d = (distance - accel_d - brake_d).max(0.0);
        self.push((peak - v0) / a_max, a_max);
        self.push(cruise_d / peak, 0.0);
        self.push(peak / a_max, -a_max);
        a_max
    }

    pub fn push_hold(&mut self, duration: f64) {
        self.push(duration, 0.0);
    }
}

/// A circuit driven along a speed profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedTrajectory {
    pub circuit: Circuit,
    pub profile: SpeedProfile,
}

impl ChassisTrajectory for TimedTrajectory {
    fn sample(&self, t: f64) -> ChassisReferenceSample {
        let (s, sd, sdd) = self.profile.eval(t);
        self.circuit.sample_at(s, sd, sdd)
    }
}
