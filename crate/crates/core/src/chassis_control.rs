//! Chassis trajectory tracking in body-frame error coordinates.
//!
//! The controlled point sits at a lateral offset `l` from the chassis
//! centre, `P = C + l·(−sin φ, cos φ)`, on both the robot and the reference.
//! Its body-frame error obeys
//!
//! ```text
//! ė1 = w(e2 + l) + v_r cos e3 − v
//! ė2 = −w e1 + v_r sin e3
//! ė3 = w_R − w,                  v_r = v_R − l·w_R
//! ```
//!
//! The plant is the reduced velocity model `ż = ż_R + u − f` with unicycle
//! pose kinematics. The law below makes the two sliding variables obey
//! `Ṡ = −Q·S − P·sw(S) + f̃`, where `f̃` is the disturbance seen through the
//! error coordinates.

use crate::integrator::Integrator;
use crate::math::{sgn, switching, wrap_angle};
use nalgebra::SVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Chassis pose: position in m, heading in rad.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChassisState {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl ChassisState {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self { x, y, phi }
    }

    /// Point at lateral offset `l` (left of the heading).
    pub fn offset_point(&self, l: f64) -> [f64; 2] {
        let (s, c) = self.phi.sin_cos();
        [self.x - l * s, self.y + l * c]
    }
}

/// Forward speed (m/s) and yaw rate (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChassisVelocity {
    pub v: f64,
    pub w: f64,
}

impl ChassisVelocity {
    pub fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    /// Left and right track speeds for track width `b`.
    pub fn track_speeds(&self, b: f64) -> (f64, f64) {
        (self.v - 0.5 * self.w * b, self.v + 0.5 * self.w * b)
    }
}

/// Reference sample: pose, velocity and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChassisReferenceSample {
    pub pose: ChassisState,
    pub vel: ChassisVelocity,
    /// `(v̇_R, ẇ_R)`.
    pub acc: ChassisVelocity,
}

impl ChassisReferenceSample {
    /// Velocity of the reference offset point along its heading, `v_R − l·w_R`.
    pub fn offset_speed(&self, l: f64) -> f64 {
        self.vel.v - l * self.vel.w
    }

    /// `(v_dx, v_dy, w_d)`: global velocity of the reference offset point and
    /// its yaw rate.
    pub fn desired_velocity(&self, l: f64) -> (f64, f64, f64) {
        let vr = self.offset_speed(l);
        let (s, c) = self.pose.phi.sin_cos();
        (vr * c, vr * s, self.vel.w)
    }
}

/// A chassis reference evaluable at any time.
pub trait ChassisTrajectory {
    fn sample(&self, t: f64) -> ChassisReferenceSample;
}

/// Constant-speed straight line from `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraightLine {
    pub start: ChassisState,
    pub speed: f64,
}

impl ChassisTrajectory for StraightLine {
    fn sample(&self, t: f64) -> ChassisReferenceSample {
        let (s, c) = self.start.phi.sin_cos();
        ChassisReferenceSample {
            pose: ChassisState::new(
                self.start.x + self.speed * t * c,
                self.start.y + self.speed * t * s,
                self.start.phi,
            ),
            vel: ChassisVelocity::new(self.speed, 0.0),
            acc: ChassisVelocity::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChassisError {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl ChassisError {
    pub fn new(e1: f64, e2: f64, e3: f64) -> Self {
        Self { e1, e2, e3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChassisGains {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub q: [f64; 2],
    pub p: [f64; 2],
    /// Lateral offset of the tracked point, m.
    pub offset: f64,
    /// Disturbance bounds.
    pub f_max: [f64; 2],
    /// Saturation width; zero selects the pure sign function.
    pub boundary_layer: f64,
}

impl Default for ChassisGains {
    fn default() -> Self {
        Self {
            k1: 4.0,
            k2: 120.0,
            k3: 20.0,
            q: [15.0, 15.0],
            p: [0.2, 0.2],
            offset: 0.3,
            f_max: [0.1, 0.1],
            boundary_layer: 0.0,
        }
    }
}

impl ChassisGains {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive"));
            }
        }
        for i in 0..2 {
            if !(self.q[i] > 0.0) {
                return Err(format!("q[{i}] must be positive"));
            }
            if !(self.f_max[i] >= 0.0) {
                return Err(format!("f_max[{i}] must be non-negative"));
            }
            if !(self.p[i] >= self.f_max[i]) {
                return Err(format!("p[{i}] must be at least f_max[{i}]"));
            }
        }
        if !self.offset.is_finite() {
            return Err("offset must be finite".into());
        }
        if !(self.boundary_layer >= 0.0) {
            return Err("boundary layer must be non-negative".into());
        }
        Ok(())
    }
}

/// `e = T_z(φ)(q_R − q)` with the heading error wrapped to `(−π, π]`.
pub fn tracking_error(reference: &ChassisState, actual: &ChassisState) -> ChassisError {
    let (s, c) = actual.phi.sin_cos();
    let dx = reference.x - actual.x;
    let dy = reference.y - actual.y;
    ChassisError {
        e1: c * dx + s * dy,
        e2: -s * dx + c * dy,
        e3: wrap_angle(reference.phi - actual.phi),
    }
}

/// Error of the offset tracked points.
pub fn offset_tracking_error(reference: &ChassisState, actual: &ChassisState, l: f64) -> ChassisError {
    let pr = reference.offset_point(l);
    let pa = actual.offset_point(l);
    tracking_error(
        &ChassisState::new(pr[0], pr[1], reference.phi),
        &ChassisState::new(pa[0], pa[1], actual.phi),
    )
}

/// Time derivative of the offset-point error.
pub fn error_rate(
    e: &ChassisError,
    reference: &ChassisReferenceSample,
    vel: &ChassisVelocity,
    l: f64,
) -> ChassisError {
    let vr = reference.offset_speed(l);
    let (s3, c3) = e.e3.sin_cos();
    ChassisError {
        e1: vel.w * (e.e2 + l) + vr * c3 - vel.v,
        e2: -vel.w * e.e1 + vr * s3,
        e3: reference.vel.w - vel.w,
    }
}

/// `s1 = ė1 + k1e1 + sgn(e1)|ė2 + k2e2|`, `s2 = ė3 + k3e3 + ė2 + k2e2`.
pub fn chassis_sliding_surface(e: &ChassisError, edot: &ChassisError, gains: &ChassisGains) -> [f64; 2] {
    let sigma = edot.e2 + gains.k2 * e.e2;
    [
        edot.e1 + gains.k1 * e.e1 + sgn(e.e1) * sigma.abs(),
        edot.e3 + gains.k3 * e.e3 + sigma,
    ]
}

/// Control input `u = (u1, u2)` added to the reference acceleration.
pub fn chassis_control_law(
    e: &ChassisError,
    edot: &ChassisError,
    reference: &ChassisReferenceSample,
    vel: &ChassisVelocity,
    gains: &ChassisGains,
) -> [f64; 2] {
    let l = gains.offset;
    let w = vel.w;
    let vr = reference.offset_speed(l);
    let vr_dot = reference.acc.v - l * reference.acc.w;
    let (s3, c3) = e.e3.sin_cos();
    let s = chassis_sliding_surface(e, edot, gains);
    let sigma = edot.e2 + gains.k2 * e.e2;
    let sw = |x: f64| switching(x, gains.boundary_layer);

    // Yaw channel first: ë2 depends on the yaw acceleration it commands.
    let b = -w * edot.e1 + vr_dot * s3 + vr * c3 * edot.e3;
    let u2 = (gains.q[1] * s[1] + gains.p[1] * sw(s[1]) + gains.k3 * edot.e3 + b
        - e.e1 * reference.acc.w
        + gains.k2 * edot.e2)
        / (1.0 + e.e1);
    let w_dot = reference.acc.w + u2;
    let e2_ddot = b - e.e1 * w_dot;

    let coupling = w * edot.e2 + (e.e2 + l) * w_dot - vr * edot.e3 * s3;
    let k_terms = gains.k1 * edot.e1 + sgn(e.e1) * sgn(sigma) * (e2_ddot + gains.k2 * edot.e2);
    let feedforward = vr_dot * c3 - reference.acc.v;
    let u1 = gains.q[0] * s[0] + gains.p[0] * sw(s[0]) + coupling + k_terms + feedforward;
    [u1, u2]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChassisControlError {
    #[error("disturbance {value} on axis {axis} exceeds bound {bound}")]
    DisturbanceBoundViolation { axis: usize, value: f64, bound: f64 },
}

/// Slack admitted when comparing a disturbance sample with its bound.
const BOUND_SLACK: f64 = 1e-12;

pub fn check_disturbance(f: [f64; 2], f_max: [f64; 2]) -> Result<(), ChassisControlError> {
    for axis in 0..2 {
        if !(f[axis].abs() <= f_max[axis] + BOUND_SLACK) {
            return Err(ChassisControlError::DisturbanceBoundViolation {
                axis: axis + 1,
                value: f[axis],
                bound: f_max[axis],
            });
        }
    }
    Ok(())
}

/// Velocity after `dt` of `ż = ż_R + u − f` with `u` and `f` held, given the
/// reference velocity at both ends of the step.
pub fn reduced_dynamics_step(
    z: ChassisVelocity,
    z_ref_now: ChassisVelocity,
    z_ref_next: ChassisVelocity,
    u: [f64; 2],
    f: [f64; 2],
    f_max: [f64; 2],
    dt: f64,
) -> Result<ChassisVelocity, ChassisControlError> {
    check_disturbance(f, f_max)?;
    Ok(ChassisVelocity {
        v: z_ref_next.v + (z.v - z_ref_now.v) + (u[0] - f[0]) * dt,
        w: z_ref_next.w + (z.w - z_ref_now.w) + (u[1] - f[1]) * dt,
    })
}

/// Chassis plant: pose plus the velocity deviation from the reference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChassisPlant {
    pub pose: ChassisState,
    /// `z − z_R`.
    pub deviation: [f64; 2],
}

impl ChassisPlant {
    pub fn velocity(&self, reference: &ChassisVelocity) -> ChassisVelocity {
        ChassisVelocity::new(reference.v + self.deviation[0], reference.w + self.deviation[1])
    }

    /// Integrates pose and velocity from `t` to `t + dt`.
    pub fn step<T: ChassisTrajectory + ?Sized>(
        &mut self,
        trajectory: &T,
        integrator: Integrator,
        t: f64,
        dt: f64,
        u: [f64; 2],
        f: [f64; 2],
        f_max: [f64; 2],
    ) -> Result<(), ChassisControlError> {
        check_disturbance(f, f_max)?;
        let x = SVector::<f64, 5>::from([
            self.pose.x,
            self.pose.y,
            self.pose.phi,
            self.deviation[0],
            self.deviation[1],
        ]);
        let next = integrator.step(t, &x, dt, |tau, s| {
            let z = trajectory.sample(tau).vel;
            let v = z.v + s[3];
            let w = z.w + s[4];
            SVector::<f64, 5>::from([v * s[2].cos(), v * s[2].sin(), w, u[0] - f[0], u[1] - f[1]])
        });
        self.pose = ChassisState::new(next[0], next[1], wrap_angle(next[2]));
        self.deviation = [next[3], next[4]];
        Ok(())
    }
}

/// Disturbance applied to the chassis velocity channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DisturbanceSpec {
    #[default]
    None,
    Constant([f64; 2]),
    /// `a·sin(2π·f·t + p)` per axis.
    Sine {
        amplitude: [f64; 2],
        frequency: [f64; 2],
        phase: [f64; 2],
    },
    /// Independent uniform samples in `[−a, a]`, drawn once per control step
    /// from a ChaCha8 stream.
    Noise { amplitude: [f64; 2] },
}

impl DisturbanceSpec {
    /// Largest magnitude the signal can take per axis.
    pub fn peak(&self) -> [f64; 2] {
        match self {
            DisturbanceSpec::None => [0.0; 2],
            DisturbanceSpec::Constant(c) => [c[0].abs(), c[1].abs()],
            DisturbanceSpec::Sine { amplitude, .. } | DisturbanceSpec::Noise { amplitude } => {
                [amplitude[0].abs(), amplitude[1].abs()]
            }
        }
    }
}

/// Stateful disturbance source.
#[derive(Debug, Clone)]
pub struct Disturbance {
    spec: DisturbanceSpec,
    rng: ChaCha8Rng,
}

impl Disturbance {
    pub fn new(spec: DisturbanceSpec, seed: u64) -> Self {
        Self {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self, t: f64) -> [f64; 2] {
        match &self.spec {
            DisturbanceSpec::None => [0.0; 2],
            DisturbanceSpec::Constant(c) => *c,
            DisturbanceSpec::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                let tau = 2.0 * std::f64::consts::PI;
                [
                    amplitude[0] * (tau * frequency[0] * t + phase[0]).sin(),
                    amplitude[1] * (tau * frequency[1] * t + phase[1]).sin(),
                ]
            }
            DisturbanceSpec::Noise { amplitude } => {
                let a = *amplitude;
                let mut draw = |amp: f64| {
                    if amp > 0.0 {
                        self.rng.random_range(-amp..=amp)
                    } else {
                        0.0
                    }
                };
                let f1 = draw(a[0]);
                let f2 = draw(a[1]);
                [f1, f2]
            }
        }
    }
}

/// One control-step record of a chassis tracking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChassisTrace {
    pub t: f64,
    pub pose: ChassisState,
    pub vel: ChassisVelocity,
    pub error: ChassisError,
    pub surface: [f64; 2],
    pub input: [f64; 2],
    pub disturbance: [f64; 2],
}

/// Closed-loop run of `steps` control periods from `initial`.
#[allow(clippy::too_many_arguments)]
pub fn track_trajectory<T: ChassisTrajectory + ?Sized>(
    trajectory: &T,
    gains: &ChassisGains,
    integrator: Integrator,
    disturbance: &mut Disturbance,
    initial: ChassisPlant,
    dt: f64,
    steps: usize,
) -> Result<Vec<ChassisTrace>, ChassisControlError> {
    let mut plant = initial;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let r = trajectory.sample(t);
        let vel = plant.velocity(&r.vel);
        let e = offset_tracking_error(&r.pose, &plant.pose, gains.offset);
        let ed = error_rate(&e, &r, &vel, gains.offset);
        let u = chassis_control_law(&e, &ed, &r, &vel, gains);
        let f = disturbance.sample(t);
        out.push(ChassisTrace {
            t,
            pose: plant.pose,
            vel,
            error: e,
            surface: chassis_sliding_surface(&e, &ed, gains),
            input: u,
            disturbance: f,
        });
        if k < steps {
            plant.step(trajectory, integrator, t, dt, u, f, gains.f_max)?;
        }
    }
    Ok(out)
}
