//! Joint-space reference generation and sliding-mode torque control of the
//! arm.
//!
//! With `e = q_R − q` and `s = ė + λe`, the law
//! `u = M(q)[q̈_R + λė + K·sw(s)] + G(q) + C(q,q̇)q̇` yields `ṡ = −K·sw(s)` on
//! the nominal model, so `½sᵀs` decreases until `s` reaches the boundary
//! layer.

use crate::chassis_control::ChassisState;
use crate::dynamics::{ArmDynamics, DynamicsError};
use crate::integrator::Integrator;
use crate::kinematics::{
    EndEffectorPose, JointAngles, JointVector, KinematicsError, LimitCheck, Manipulator, ToolOffset,
};
use crate::math::switching;
use nalgebra::SVector;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmGains {
    /// 1/s.
    pub lambda: f64,
    /// Switching gains, rad/s².
    pub k: [f64; 4],
    /// Width of the saturation ramp; zero selects the pure sign function.
    pub boundary_layer: f64,
    /// Optional symmetric torque bounds, N·m.
    pub torque_limit: Option<[f64; 4]>,
}

impl Default for ArmGains {
    fn default() -> Self {
        Self {
            lambda: 20.0,
            k: [5.0; 4],
            boundary_layer: 0.01,
            torque_limit: None,
        }
    }
}

impl ArmGains {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err("lambda must be positive".into());
        }
        if self.k.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
            return Err("switching gains must be non-negative".into());
        }
        if !(self.boundary_layer >= 0.0 && self.boundary_layer.is_finite()) {
            return Err("boundary layer must be non-negative".into());
        }
        if let Some(lim) = self.torque_limit {
            if lim.iter().any(|l| !(*l > 0.0)) {
                return Err("torque limits must be positive".into());
            }
        }
        Ok(())
    }
}

/// One reference sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmReferenceSample {
    pub q: JointVector,
    pub qd: JointVector,
    pub qdd: JointVector,
}

/// Joint reference on a uniform time grid of spacing `dt`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArmReference {
    pub dt: f64,
    pub samples: Vec<ArmReferenceSample>,
}

impl ArmReference {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("reference sample {index}: {source}")]
pub struct ArmReferenceError {
    pub index: usize,
    #[source]
    pub source: KinematicsError,
}

/// Where the arm base sits on the chassis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmMount {
    /// Forward and leftward offset from the chassis centre, m.
    pub offset: [f64; 2],
    /// Height of the arm base frame above the ground, m.
    pub height: f64,
}

impl ArmMount {
    /// Global target (mm) expressed in the arm base frame (mm).
    pub fn to_base(&self, chassis: &ChassisState, target: &EndEffectorPose) -> EndEffectorPose {
        let (s, c) = chassis.phi.sin_cos();
        let bx = chassis.x + c * self.offset[0] - s * self.offset[1];
        let by = chassis.y + s * self.offset[0] + c * self.offset[1];
        let dx = target.x / 1000.0 - bx;
        let dy = target.y / 1000.0 - by;
        EndEffectorPose {
            x: (c * dx + s * dy) * 1000.0,
            y: (-s * dx + c * dy) * 1000.0,
            z: target.z - self.height * 1000.0,
            phi: target.phi,
        }
    }

    /// Base-frame pose (mm) expressed in the global frame (mm).
    pub fn to_global(&self, chassis: &ChassisState, local: &EndEffectorPose) -> EndEffectorPose {
        let (s, c) = chassis.phi.sin_cos();
        let lx = local.x / 1000.0 + self.offset[0];
        let ly = local.y / 1000.0 + self.offset[1];
        EndEffectorPose {
            x: (chassis.x + c * lx - s * ly) * 1000.0,
            y: (chassis.y + s * lx + c * ly) * 1000.0,
            z: local.z + self.height * 1000.0,
            phi: local.phi,
        }
    }

    /// Global tool position (mm) for configuration `q`.
    pub fn tool_position(
        &self,
        arm: &Manipulator,
        tool: ToolOffset,
        chassis: &ChassisState,
        q: &JointAngles,
    ) -> [f64; 3] {
        let local = arm
            .forward_kinematics(q, tool, LimitCheck::Bypass)
            .expect("unchecked forward kinematics is total");
        let g = self.to_global(chassis, &local);
        [g.x, g.y, g.z]
    }
}

/// Unwraps a base-angle sequence so consecutive samples differ by < π.
pub fn unwrap_angles(angles: &mut [f64]) {
    for k in 1..angles.len() {
        let mut d = angles[k] - angles[k - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        angles[k] = angles[k - 1] + d;
    }
}

/// First and second derivatives of uniformly sampled data by second-order
/// finite differences (central inside, one-sided at the ends).
pub fn differentiate(values: &[JointVector], dt: f64) -> (Vec<JointVector>, Vec<JointVector>) {
    let n = values.len();
    let zero = JointVector::zeros();
    if n < 2 {
        return (vec![zero; n], vec![zero; n]);
    }
    let v = values;
    let mut d1 = vec![zero; n];
    let mut d2 = vec![zero; n];
    if n == 2 {
        let slope = (v[1] - v[0]) / dt;
        return (vec![slope; 2], vec![zero; 2]);
    }
    for k in 1..n - 1 {
        d1[k] = (v[k + 1] - v[k - 1]) / (2.0 * dt);
        d2[k] = (v[k + 1] - v[k] * 2.0 + v[k - 1]) / (dt * dt);
    }
    d1[0] = (v[0] * -3.0 + v[1] * 4.0 - v[2]) / (2.0 * dt);
    d1[n - 1] = (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) / (2.0 * dt);
    if n >= 4 {
        d2[0] = (v[0] * 2.0 - v[1] * 5.0 + v[2] * 4.0 - v[3]) / (dt * dt);
        d2[n - 1] = (v[n - 1] * 2.0 - v[n - 2] * 5.0 + v[n - 3] * 4.0 - v[n - 4]) / (dt * dt);
    } else {
        d2[0] = d2[1];
        d2[n - 1] = d2[n - 2];
    }
    (d1, d2)
}

/// Solves the arm configuration for every sample of a global end-effector
/// path seen from the moving chassis, then differentiates numerically.
pub fn build_arm_reference(
    arm: &Manipulator,
    mount: &ArmMount,
    tool: ToolOffset,
    dt: f64,
    chassis: &[ChassisState],
    targets: &[EndEffectorPose],
) -> Result<ArmReference, ArmReferenceError> {
    assert_eq!(
        chassis.len(),
        targets.len(),
        "chassis and end-effector series must share the time grid"
    );
    let mut q = Vec::with_capacity(targets.len());
    for (index, (c, t)) in chassis.iter().zip(targets.iter()).enumerate() {
        let local = mount.to_base(c, t);
        let sol = arm
            .inverse_kinematics(&local, tool)
            .map_err(|source| ArmReferenceError { index, source })?;
        q.push(sol.as_vector());
    }
    let mut yaw: Vec<f64> = q.iter().map(|v| v[0]).collect();
    unwrap_angles(&mut yaw);
    for (v, y) in q.iter_mut().zip(yaw) {
        v[0] = y;
    }
    let (qd, qdd) = differentiate(&q, dt);
    Ok(ArmReference {
        dt,
        samples: q
            .into_iter()
            .zip(qd)
            .zip(qdd)
            .map(|((q, qd), qdd)| ArmReferenceSample { q, qd, qdd })
            .collect(),
    })
}

pub fn sliding_surface(e: &JointVector, edot: &JointVector, lambda: f64) -> JointVector {
    edot + e * lambda
}

/// Output of one evaluation of the control law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmCommand {
    pub torque: JointVector,
    pub error: JointVector,
    pub surface: JointVector,
}

pub fn arm_control_law(
    dynamics: &ArmDynamics,
    q: &JointVector,
    qd: &JointVector,
    reference: &ArmReferenceSample,
    gains: &ArmGains,
) -> ArmCommand {
    let e = reference.q - q;
    let edot = reference.qd - qd;
    let s = sliding_surface(&e, &edot, gains.lambda);
    let sw = JointVector::from_fn(|i, _| gains.k[i] * switching(s[i], gains.boundary_layer));
    let t = dynamics.terms(q, qd);
    let mut torque = t.m * (reference.qdd + edot * gains.lambda + sw) + t.g + t.c * qd;
    if let Some(lim) = gains.torque_limit {
        for i in 0..4 {
            torque[i] = torque[i].clamp(-lim[i], lim[i]);
        }
    }
    ArmCommand {
        torque,
        error: e,
        surface: s,
    }
}

/// `½sᵀs`.
pub fn lyapunov(s: &JointVector) -> f64 {
    0.5 * s.dot(s)
}

/// Advances the arm plant by `dt` with the torque held constant.
pub fn arm_plant_step(
    dynamics: &ArmDynamics,
    integrator: Integrator,
    q: &JointVector,
    qd: &JointVector,
    torque: &JointVector,
    dt: f64,
) -> Result<(JointVector, JointVector), DynamicsError> {
    let mut x = SVector::<f64, 8>::zeros();
    x.fixed_rows_mut::<4>(0).copy_from(q);
    x.fixed_rows_mut::<4>(4).copy_from(qd);
    let mut failure = None;
    let next = integrator.step(0.0, &x, dt, |_, s| {
        let qs: JointVector = s.fixed_rows::<4>(0).into();
        let qds: JointVector = s.fixed_rows::<4>(4).into();
        let qdd = match dynamics.forward_dynamics(&qs, &qds, torque) {
            Ok(a) => a,
            Err(e) => {
                failure = Some(e);
                JointVector::zeros()
            }
        };
        let mut out = SVector::<f64, 8>::zeros();
        out.fixed_rows_mut::<4>(0).copy_from(&qds);
        out.fixed_rows_mut::<4>(4).copy_from(&qdd);
        out
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((next.fixed_rows::<4>(0).into(), next.fixed_rows::<4>(4).into()))
}

/// State and command at one control instant of a tracking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmTrace {
    pub q: JointVector,
    pub qd: JointVector,
    pub command: ArmCommand,
}

/// Closed-loop run over a whole reference, starting from `(q0, qd0)`.
pub fn track_reference(
    dynamics: &ArmDynamics,
    gains: &ArmGains,
    integrator: Integrator,
    reference: &ArmReference,
    q0: JointVector,
    qd0: JointVector,
) -> Result<Vec<ArmTrace>, DynamicsError> {
    let mut q = q0;
    let mut qd = qd0;
    let mut out = Vec::with_capacity(reference.len());
    for (k, r) in reference.samples.iter().enumerate() {
        let command = arm_control_law(dynamics, &q, &qd, r, gains);
        out.push(ArmTrace { q, qd, command });
        if k + 1 < reference.len() {
            (q, qd) = arm_plant_step(dynamics, integrator, &q, &qd, &command.torque, reference.dt)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_by_hand() {
        let z = JointVector::zeros();
        assert_eq!(sliding_surface(&z, &z, 20.0), z);
        let e = JointVector::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(sliding_surface(&e, &z, 2.0), JointVector::new(2.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn equilibrium_needs_only_gravity() {
        let d = ArmDynamics::default();
        let q = JointVector::new(0.4, 1.2, -0.3, -0.6);
        let r = ArmReferenceSample {
            q,
            ..Default::default()
        };
        let cmd = arm_control_law(&d, &q, &JointVector::zeros(), &r, &ArmGains::default());
        assert_eq!(cmd.torque, d.gravity_vector(&q));
        let sign_gains = ArmGains {
            boundary_layer: 0.0,
            ..ArmGains::default()
        };
        let cmd = arm_control_law(&d, &q, &JointVector::zeros(), &r, &sign_gains);
        assert_eq!(cmd.torque, d.gravity_vector(&q));
    }

    #[test]
    fn stationary_target_gives_constant_reference() {
        let arm = Manipulator::default();
        let chassis = vec![ChassisState::new(1.0, -2.0, 0.3); 20];
        let target = EndEffectorPose::new(1000.0 + 1800.0 * 0.3f64.cos(), -2000.0 + 1800.0 * 0.3f64.sin(), 900.0, 0.4);
        let targets = vec![target; 20];
        let r = build_arm_reference(&arm, &ArmMount::default(), ToolOffset::default(), 0.001, &chassis, &targets).unwrap();
        for s in &r.samples {
            assert_eq!(s.q, r.samples[0].q);
            assert!(s.qd.abs().max() < 1e-9);
            assert!(s.qdd.abs().max() < 1e-6);
        }
    }

    #[test]
    fn receding_target_round_trips() {
        let arm = Manipulator::default();
        let mount = ArmMount {
            offset: [0.1, -0.05],
            height: 0.2,
        };
        let tool = ToolOffset::new(150.0);
        let dt = 0.01;
        let chassis: Vec<_> = (0..100)
            .map(|k| ChassisState::new(0.88 * k as f64 * dt, 0.0, 0.0))
            .collect();
        let target = EndEffectorPose::new(2100.0, 700.0, 800.0, 0.3);
        let targets = vec![target; chassis.len()];
        let r = build_arm_reference(&arm, &mount, tool, dt, &chassis, &targets).unwrap();
        assert!(r.samples[0].q != r.samples[99].q);
        for (c, s) in chassis.iter().zip(&r.samples) {
            let p = mount.tool_position(&arm, tool, c, &JointAngles::from_vector(&s.q));
            assert!((p[0] - target.x).abs() < 1e-9);
            assert!((p[1] - target.y).abs() < 1e-9);
            assert!((p[2] - target.z).abs() < 1e-9);
        }
    }

    #[test]
    fn unreachable_sample_is_located() {
        let arm = Manipulator::default();
        let chassis: Vec<_> = (0..5).map(|k| ChassisState::new(k as f64, 0.0, 0.0)).collect();
        let targets = vec![EndEffectorPose::new(2500.0, 0.0, 500.0, 0.0); 5];
        let err = build_arm_reference(&arm, &ArmMount::default(), ToolOffset::default(), 1.0, &chassis, &targets).unwrap_err();
        // Radius 2.5, 1.5, 0.5 m: the last is inside the minimum reach.
        assert_eq!(err.index, 2);
    }

    #[test]
    fn differences_are_exact_on_quadratics() {
        let dt = 0.1;
        let v: Vec<_> = (0..6)
            .map(|k| {
                let t = k as f64 * dt;
                JointVector::repeat(3.0 * t * t - t + 2.0)
            })
            .collect();
        let (d1, d2) = differentiate(&v, dt);
        for k in 0..6 {
            let t = k as f64 * dt;
            assert!((d1[k][0] - (6.0 * t - 1.0)).abs() < 1e-10);
            assert!((d2[k][0] - 6.0).abs() < 1e-8);
        }
    }

    #[test]
    fn unwrap_removes_seam() {
        let mut a = vec![3.0, 3.1, -3.1, -3.0];
        unwrap_angles(&mut a);
        assert!((a[2] - (2.0 * PI - 3.1)).abs() < 1e-12);
        assert!(a.windows(2).all(|w| (w[1] - w[0]).abs() < 0.2));
    }
}
