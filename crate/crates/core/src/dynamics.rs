//! Lagrangian equations of motion `M(q)q̈ + C(q,q̇)q̇ + G(q) = Q` for the
//! palletizing arm.
//!
//! Links 2, 3 and the wrist link are slender rods whose angles are absolute
//! (measured from the horizontal), so each body's centre of mass is a sum of
//! fixed-length vectors `ℓ·u(θ_j + δ)` from a fixed origin in the arm plane.
//! The arm plane itself yaws with θ1. All quantities here are SI: metres,
//! kilograms, radians, newton-metres.

use crate::kinematics::{JointVector, Manipulator, ToolOffset};
use nalgebra::Matrix4;
use thiserror::Error;

pub type JointMatrix = Matrix4<f64>;

/// Upper bound of the payload carried at the tool point, kg.
pub const MAX_PAYLOAD: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    /// Cholesky factorisation of the mass matrix failed.
    #[error("mass matrix is not positive definite")]
    SolveFailure,
    #[error("invalid inertial parameters: {0}")]
    InvalidParams(String),
}

/// Mass properties of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkInertia {
    /// kg.
    pub mass: f64,
    /// Distance from the proximal joint to the centre of mass along the
    /// link, m.
    pub com: f64,
    /// Rotary inertia about the centre of mass, kg·m². For link 1 this is
    /// the inertia about the vertical axis; for the others the transverse
    /// inertia of the rod.
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkInertialParams {
    /// Base column, upper arm, forearm and wrist link.
    pub links: [LinkInertia; 4],
    /// Point mass at the tool, kg.
    pub payload: f64,
    /// m/s².
    pub gravity: f64,
    /// Optional viscous joint damping, N·m·s/rad.
    pub damping: [f64; 4],
}

impl LinkInertialParams {
    /// Uniform rods with masses proportional to link length, centre of mass
    /// at mid-link.
    pub fn uniform_rods(lengths: [f64; 4], total_mass: f64, payload: f64, gravity: f64) -> Self {
        let sum: f64 = lengths.iter().sum();
        let rod = |len: f64| {
            let mass = total_mass * len / sum;
            LinkInertia {
                mass,
                com: 0.5 * len,
                inertia: mass * len * len / 12.0,
            }
        };
        Self {
            links: lengths.map(rod),
            payload,
            gravity,
            damping: [0.0; 4],
        }
    }

    pub fn for_geometry(geom: &ArmGeometry, total_mass: f64, payload: f64, gravity: f64) -> Self {
        Self::uniform_rods(
            [geom.a[0], geom.a[1], geom.a[2], geom.a[4]],
            total_mass,
            payload,
            gravity,
        )
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (i, l) in self.links.iter().enumerate() {
            if !(l.mass > 0.0) {
                return Err(DynamicsError::InvalidParams(format!("link {} mass must be positive", i + 1)));
            }
            if !(l.inertia > 0.0) {
                return Err(DynamicsError::InvalidParams(format!("link {} inertia must be positive", i + 1)));
            }
            if !(l.com.is_finite() && l.com >= 0.0) {
                return Err(DynamicsError::InvalidParams(format!("link {} centre of mass must be non-negative", i + 1)));
            }
        }
        if !(0.0..=MAX_PAYLOAD).contains(&self.payload) {
            return Err(DynamicsError::InvalidParams(format!(
                "payload must lie in [0, {MAX_PAYLOAD}] kg"
            )));
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(DynamicsError::InvalidParams("gravity must be non-negative".into()));
        }
        if self.damping.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(DynamicsError::InvalidParams("damping must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for LinkInertialParams {
    fn default() -> Self {
        Self::for_geometry(&ArmGeometry::default(), 400.0, MAX_PAYLOAD, 9.81)
    }
}

/// Link constants in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmGeometry {
    pub a: [f64; 5],
    pub d1: f64,
    pub y5p: f64,
}

impl ArmGeometry {
    pub fn from_model(arm: &Manipulator, tool: ToolOffset) -> Self {
        let mut a = [0.0; 5];
        for (i, v) in a.iter_mut().enumerate() {
            *v = arm.dh.a(i + 1) / 1000.0;
        }
        Self {
            a,
            d1: arm.dh.d1() / 1000.0,
            y5p: tool.y5p / 1000.0,
        }
    }
}

impl Default for ArmGeometry {
    fn default() -> Self {
        Self::from_model(&Manipulator::default(), ToolOffset::default())
    }
}

/// A rigid body of the planar sub-chain.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Body {
    mass: f64,
    /// Fixed `(r, z)` origin in the arm plane.
    origin: [f64; 2],
    /// Lever lengths along the directions of θ2, θ3, θ4.
    lever: [f64; 3],
    /// Constant angle offsets added to θ2, θ3, θ4.
    offset: [f64; 3],
    /// Transverse inertia and the planar joint (0..3) it spins with.
    rod: Option<(f64, usize)>,
}

/// `M`, `C` and `G` evaluated at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTerms {
    pub m: JointMatrix,
    pub c: JointMatrix,
    pub g: JointVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmDynamics {
    pub geometry: ArmGeometry,
    pub params: LinkInertialParams,
    bodies: Vec<Body>,
}

impl Default for ArmDynamics {
    fn default() -> Self {
        Self::new(ArmGeometry::default(), LinkInertialParams::default())
    }
}

impl ArmDynamics {
    pub fn new(geometry: ArmGeometry, params: LinkInertialParams) -> Self {
        let a = geometry.a;
        let shoulder = [a[0], geometry.d1];
        let wrist = [a[0] + a[3], geometry.d1];
        let [_, l2, l3, l4] = params.links;
        let mut bodies = vec![
            Body {
                mass: l2.mass,
                origin: shoulder,
                lever: [l2.com, 0.0, 0.0],
                offset: [0.0; 3],
                rod: Some((l2.inertia, 0)),
            },
            Body {
                mass: l3.mass,
                origin: shoulder,
                lever: [a[1], l3.com, 0.0],
                offset: [0.0; 3],
                rod: Some((l3.inertia, 1)),
            },
            Body {
                mass: l4.mass,
                origin: wrist,
                lever: [a[1], a[2], l4.com],
                offset: [0.0; 3],
                rod: Some((l4.inertia, 2)),
            },
        ];
        if params.payload > 0.0 {
            bodies.push(Body {
                mass: params.payload,
                origin: wrist,
                lever: [a[1], a[2], a[4].hypot(geometry.y5p)],
                offset: [0.0, 0.0, geometry.y5p.atan2(a[4])],
                rod: None,
            });
        }
        Self {
            geometry,
            params,
            bodies,
        }
    }

    fn planar_angles(q: &JointVector) -> [f64; 3] {
        [q[1], q[2], q[3]]
    }

    /// Centre-of-mass `(r, z)` of each planar body.
    fn body_positions(&self, q: &JointVector) -> Vec<[f64; 2]> {
        let th = Self::planar_angles(q);
        self.bodies
            .iter()
            .map(|b| {
                let mut p = b.origin;
                for j in 0..3 {
                    let (s, c) = (th[j] + b.offset[j]).sin_cos();
                    p[0] += b.lever[j] * c;
                    p[1] += b.lever[j] * s;
                }
                p
            })
            .collect()
    }

    fn yaw_inertia_fixed(&self) -> f64 {
        let l1 = self.params.links[0];
        l1.inertia + l1.mass * l1.com * l1.com
    }

    /// Kinetic energy built from body velocities and spin rates.
    pub fn kinetic_energy(&self, q: &JointVector, qd: &JointVector) -> f64 {
        let th = Self::planar_angles(q);
        let rates = [qd[1], qd[2], qd[3]];
        let pos = self.body_positions(q);
        let mut twice_k = self.yaw_inertia_fixed() * qd[0] * qd[0];
        for (b, p) in self.bodies.iter().zip(pos.iter()) {
            let (mut vr, mut vz) = (0.0, 0.0);
            for j in 0..3 {
                let (s, c) = (th[j] + b.offset[j]).sin_cos();
                vr -= b.lever[j] * s * rates[j];
                vz += b.lever[j] * c * rates[j];
            }
            let tangential = p[0] * qd[0];
            twice_k += b.mass * (vr * vr + vz * vz + tangential * tangential);
            if let Some((inertia, j)) = b.rod {
                let cj = th[j].cos();
                twice_k += inertia * (rates[j] * rates[j] + qd[0] * qd[0] * cj * cj);
            }
        }
        0.5 * twice_k
    }

    /// Gravitational potential relative to the shoulder-height datum.
    pub fn potential_energy(&self, q: &JointVector) -> f64 {
        let g = self.params.gravity;
        self.body_positions(q)
            .iter()
            .zip(self.bodies.iter())
            .map(|(p, b)| b.mass * g * p[1])
            .sum()
    }

    pub fn mass_matrix(&self, q: &JointVector) -> JointMatrix {
        let th = Self::planar_angles(q);
        let pos = self.body_positions(q);
        let mut m = JointMatrix::zeros();
        m[(0, 0)] = self.yaw_inertia_fixed();
        for (b, p) in self.bodies.iter().zip(pos.iter()) {
            m[(0, 0)] += b.mass * p[0] * p[0];
            for j in 0..3 {
                for k in 0..3 {
                    let dpsi = th[j] + b.offset[j] - th[k] - b.offset[k];
                    m[(j + 1, k + 1)] += b.mass * b.lever[j] * b.lever[k] * dpsi.cos();
                }
            }
            if let Some((inertia, j)) = b.rod {
                let cj = th[j].cos();
                m[(0, 0)] += inertia * cj * cj;
                m[(j + 1, j + 1)] += inertia;
            }
        }
        m
    }

    /// Partial derivatives `∂M/∂q_i`, `i = 0..4`.
    pub fn mass_matrix_partials(&self, q: &JointVector) -> [JointMatrix; 4] {
        let th = Self::planar_angles(q);
        let pos = self.body_positions(q);
        let mut dm = [JointMatrix::zeros(); 4];
        for (b, p) in self.bodies.iter().zip(pos.iter()) {
            for i in 0..3 {
                let dr = -b.lever[i] * (th[i] + b.offset[i]).sin();
                dm[i + 1][(0, 0)] += 2.0 * b.mass * p[0] * dr;
            }
            for j in 0..3 {
                for k in 0..3 {
                    if j == k {
                        continue;
                    }
                    let dpsi = th[j] + b.offset[j] - th[k] - b.offset[k];
                    let w = -b.mass * b.lever[j] * b.lever[k] * dpsi.sin();
                    dm[j + 1][(j + 1, k + 1)] += w;
                    dm[k + 1][(j + 1, k + 1)] -= w;
                }
            }
            if let Some((inertia, j)) = b.rod {
                dm[j + 1][(0, 0)] -= inertia * (2.0 * th[j]).sin();
            }
        }
        dm
    }

    /// Coriolis/centrifugal matrix from Christoffel symbols of the first
    /// kind.
    pub fn coriolis_matrix(&self, q: &JointVector, qd: &JointVector) -> JointMatrix {
        let dm = self.mass_matrix_partials(q);
        let mut c = JointMatrix::zeros();
        for k in 0..4 {
            for j in 0..4 {
                let mut sum = 0.0;
                for i in 0..4 {
                    sum += 0.5 * (dm[i][(k, j)] + dm[j][(k, i)] - dm[k][(i, j)]) * qd[i];
                }
                c[(k, j)] = sum;
            }
        }
        c
    }

    pub fn gravity_vector(&self, q: &JointVector) -> JointVector {
        let th = Self::planar_angles(q);
        let g = self.params.gravity;
        let mut out = JointVector::zeros();
        for b in &self.bodies {
            for j in 0..3 {
                out[j + 1] += g * b.mass * b.lever[j] * (th[j] + b.offset[j]).cos();
            }
        }
        out
    }

    pub fn damping_torque(&self, qd: &JointVector) -> JointVector {
        JointVector::from_fn(|i, _| self.params.damping[i] * qd[i])
    }

    pub fn terms(&self, q: &JointVector, qd: &JointVector) -> DynamicsTerms {
        DynamicsTerms {
            m: self.mass_matrix(q),
            c: self.coriolis_matrix(q, qd),
            g: self.gravity_vector(q),
        }
    }

    /// `q̈ = M⁻¹(Q − C q̇ − G − D q̇)`.
    pub fn forward_dynamics(
        &self,
        q: &JointVector,
        qd: &JointVector,
        torque: &JointVector,
    ) -> Result<JointVector, DynamicsError> {
        let t = self.terms(q, qd);
        let rhs = torque - t.c * qd - t.g - self.damping_torque(qd);
        let chol = t.m.cholesky().ok_or(DynamicsError::SolveFailure)?;
        Ok(chol.solve(&rhs))
    }

    /// `M q̈ + C q̇ + G + D q̇`.
    pub fn inverse_dynamics(&self, q: &JointVector, qd: &JointVector, qdd: &JointVector) -> JointVector {
        let t = self.terms(q, qd);
        t.m * qdd + t.c * qd + t.g + self.damping_torque(qd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{JointAngles, JointLimits};
    use proptest::prelude::*;

    fn state() -> impl Strategy<Value = (JointVector, JointVector)> {
        (
            (-3.0f64..3.0, 0.0f64..2.35, -2.09f64..0.27, -1.57f64..0.0),
            (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        )
            .prop_filter("in limits", |((a, b, c, d), _)| {
                JointLimits::default().contains(&JointAngles::new(*a, *b, *c, *d))
            })
            .prop_map(|((a, b, c, d), (e, f, g, h))| {
                (JointVector::new(a, b, c, d), JointVector::new(e, f, g, h))
            })
    }

    fn with_tool() -> ArmDynamics {
        let geom = ArmGeometry {
            y5p: 0.15,
            ..ArmGeometry::default()
        };
        ArmDynamics::new(geom, LinkInertialParams::for_geometry(&geom, 400.0, 20.0, 9.81))
    }

    #[test]
    fn at_rest_no_kinetic_energy() {
        let d = ArmDynamics::default();
        let q = JointVector::new(0.3, 1.0, -0.2, -0.5);
        assert_eq!(d.kinetic_energy(&q, &JointVector::zeros()), 0.0);
        assert_eq!(d.coriolis_matrix(&q, &JointVector::zeros()), JointMatrix::zeros());
    }

    #[test]
    fn point_masses_at_joints() {
        // Masses lumped at the distal joints: elbow (m2), wrist start (m3)
        // and tool (m4), with a negligible rod inertia.
        let geom = ArmGeometry::default();
        let tiny = 1e-12;
        let (m2, m3, m4) = (3.0, 5.0, 7.0);
        let params = LinkInertialParams {
            links: [
                LinkInertia { mass: 1.0, com: 0.0, inertia: tiny },
                LinkInertia { mass: m2, com: geom.a[1], inertia: tiny },
                LinkInertia { mass: m3, com: geom.a[2], inertia: tiny },
                LinkInertia { mass: m4, com: geom.a[4], inertia: tiny },
            ],
            payload: 0.0,
            gravity: 9.81,
            damping: [0.0; 4],
        };
        let d = ArmDynamics::new(geom, params);
        let (t2, t3, t4) = (0.7, -0.4, -0.3);
        let m = d.mass_matrix(&JointVector::new(0.0, t2, t3, t4));
        let (a2, a3, a5) = (geom.a[1], geom.a[2], geom.a[4]);
        let c23 = (t2 - t3).cos();
        let hand22 = (m2 + m3 + m4) * a2 * a2;
        let hand23 = (m3 + m4) * a2 * a3 * c23;
        let hand33 = (m3 + m4) * a3 * a3;
        let hand24 = m4 * a2 * a5 * (t2 - t4).cos();
        let hand44 = m4 * a5 * a5;
        let tol = 1e-9;
        assert!((m[(1, 1)] - hand22).abs() < tol);
        assert!((m[(1, 2)] - hand23).abs() < tol);
        assert!((m[(2, 2)] - hand33).abs() < tol);
        assert!((m[(1, 3)] - hand24).abs() < tol);
        assert!((m[(3, 3)] - hand44).abs() < tol);
        let r2 = geom.a[0] + a2 * t2.cos();
        let r3 = r2 + a3 * t3.cos();
        let r4 = r3 + geom.a[3] + a5 * t4.cos();
        let hand11 = m2 * r2 * r2 + m3 * r3 * r3 + m4 * r4 * r4;
        assert!((m[(0, 0)] - hand11).abs() < tol);
        for j in 1..4 {
            assert_eq!(m[(0, j)], 0.0);
        }
    }

    #[test]
    fn massless_arm_has_no_gravity() {
        let mut p = LinkInertialParams::default();
        p.gravity = 0.0;
        let d = ArmDynamics::new(ArmGeometry::default(), p);
        assert_eq!(d.gravity_vector(&JointVector::new(0.1, 0.5, -0.3, -0.2)), JointVector::zeros());
    }

    #[test]
    fn static_equilibrium() {
        let d = with_tool();
        let q = JointVector::new(0.2, 1.1, -0.5, -0.7);
        let g = d.gravity_vector(&q);
        let qdd = d.forward_dynamics(&q, &JointVector::zeros(), &g).unwrap();
        assert!(qdd.abs().max() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = LinkInertialParams::default();
        p.payload = 25.0;
        assert!(p.validate().is_err());
        let mut p = LinkInertialParams::default();
        p.links[2].mass = 0.0;
        assert!(p.validate().is_err());
        assert!(LinkInertialParams::default().validate().is_ok());
    }

    #[test]
    fn singular_mass_matrix_is_reported() {
        let mut p = LinkInertialParams::default();
        for l in p.links.iter_mut() {
            l.mass = 0.0;
            l.inertia = 0.0;
        }
        p.payload = 0.0;
        let d = ArmDynamics::new(ArmGeometry::default(), p);
        let q = JointVector::new(0.0, 1.0, 0.0, -0.5);
        assert_eq!(
            d.forward_dynamics(&q, &JointVector::zeros(), &JointVector::zeros()),
            Err(DynamicsError::SolveFailure)
        );
    }

    proptest! {
        #[test]
        fn mass_matrix_is_kinetic_hessian((q, _) in state()) {
            let d = with_tool();
            let m = d.mass_matrix(&q);
            let e = |i: usize| JointVector::from_fn(|k, _| if k == i { 1.0 } else { 0.0 });
            // K is exactly quadratic in q̇, so polarisation recovers M.
            for i in 0..4 {
                for j in 0..4 {
                    let kp = d.kinetic_energy(&q, &(e(i) + e(j)));
                    let km = d.kinetic_energy(&q, &(e(i) - e(j)));
                    let hessian = 0.5 * (kp - km);
                    prop_assert!((hessian - m[(i, j)]).abs() < 1e-8 * m.abs().max().max(1.0));
                }
            }
        }

        #[test]
        fn kinetic_energy_even_in_rates((q, qd) in state()) {
            let d = with_tool();
            prop_assert_eq!(d.kinetic_energy(&q, &qd), d.kinetic_energy(&q, &(-qd)));
        }

        #[test]
        fn mass_matrix_independent_of_yaw((q, _) in state(), yaw in -3.0f64..3.0) {
            let d = with_tool();
            let mut q2 = q;
            q2[0] = yaw;
            prop_assert_eq!(d.mass_matrix(&q), d.mass_matrix(&q2));
        }

        #[test]
        fn partials_match_differences((q, _) in state()) {
            let d = with_tool();
            let dm = d.mass_matrix_partials(&q);
            let h = 1e-5;
            for i in 0..4 {
                let mut qp = q;
                let mut qm = q;
                qp[i] += h;
                qm[i] -= h;
                let fd = (d.mass_matrix(&qp) - d.mass_matrix(&qm)) / (2.0 * h);
                prop_assert!((fd - dm[i]).abs().max() < 1e-5);
            }
        }

        #[test]
        fn inverse_forward_consistency((q, qd) in state(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let d = with_tool();
            let target = JointVector::new(a, b, -a, 0.5 * b);
            let torque = d.inverse_dynamics(&q, &qd, &target);
            let back = d.forward_dynamics(&q, &qd, &torque).unwrap();
            prop_assert!((back - target).abs().max() < 1e-9);
        }
    }
}
