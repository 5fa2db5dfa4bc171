//! Raster sweep of the end effector over one face of the crib.
//!
//! The raster lies in a vertical plane parallel to the straight that starts
//! the edge, at `plane_offset` metres past the crib centre (measured away
//! from the chassis). Horizontal passes alternate direction and are joined
//! by semicircular turnarounds in that plane, so the tool moves at constant
//! speed with a continuous direction of travel.

use super::{Circuit, MissionError};
use crate::kinematics::EndEffectorPose;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub passes: usize,
    /// Length of each horizontal pass, m.
    pub horizontal_span: f64,
    /// Height between the first and last pass, m.
    pub vertical_span: f64,
    /// Tool speed, m/s.
    pub speed: f64,
    /// Height of the first pass above the ground, m.
    pub start_height: f64,
    /// Plane position past the crib centre, m.
    pub plane_offset: f64,
    /// Raster centre along the direction of travel, from `K_i`, m.
    pub along_offset: f64,
    /// Tool pitch held during the sweep, rad.
    pub pitch: f64,
    /// First pass runs with the chassis (`true`) or against it.
    pub forward_first: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            passes: 3,
            horizontal_span: 0.8,
            vertical_span: 0.5,
            speed: 1.4,
            start_height: 0.6,
            plane_offset: 0.4,
            along_offset: 0.0,
            pitch: 30f64.to_radians(),
            forward_first: true,
        }
    }
}

impl SweepSpec {
    /// Total tool path length, m.
    pub fn path_length(&self) -> f64 {
        match self.passes {
            0 => 0.0,
            n => n as f64 * self.horizontal_span + (n as f64 - 1.0) * 0.5 * PI * self.step(),
        }
    }

    fn step(&self) -> f64 {
        if self.passes > 1 {
            self.vertical_span / (self.passes as f64 - 1.0)
        } else {
            0.0
        }
    }

    pub fn duration(&self) -> f64 {
        self.path_length() / self.speed
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err("speed must be positive".into());
        }
        if !(self.horizontal_span >= 0.0 && self.vertical_span >= 0.0) {
            return Err("spans must be non-negative".into());
        }
        if !(self.start_height.is_finite() && self.plane_offset.is_finite() && self.along_offset.is_finite()) {
            return Err("raster placement must be finite".into());
        }
        if !(0.0..=0.5 * PI).contains(&self.pitch) {
            return Err("pitch must lie in [0°, 90°]".into());
        }
        Ok(())
    }
}

/// Sweep of one edge, placed in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// 1-based edge index.
    pub edge: usize,
    pub spec: SweepSpec,
    /// Raster-plane coordinates are `(along, z)` around this frame.
    origin: [f64; 2],
    heading: f64,
}

/// Slack for comparing a sweep duration with its deadline, s.
const DEADLINE_SLACK: f64 = 1e-9;

/// Places the sweep of `edge` and checks it ends before the chassis reaches
/// the next K point.
pub fn build_sweep(edge: usize, spec: &SweepSpec, circuit: &Circuit) -> Result<Sweep, MissionError> {
    if !(1..=4).contains(&edge) {
        return Err(MissionError::InfeasibleSweep {
            edge,
            reason: "edge index must be 1..=4".into(),
        });
    }
    spec.validate().map_err(|reason| MissionError::InfeasibleSweep { edge, reason })?;
    let deadline = circuit.edge_time();
    if spec.duration() > deadline + DEADLINE_SLACK {
        return Err(MissionError::InfeasibleSweep {
            edge,
            reason: format!(
                "takes {:.4} s but the chassis reaches the next K point after {:.4} s",
                spec.duration(),
                deadline
            ),
        });
    }
    Ok(Sweep {
        edge,
        spec: spec.clone(),
        origin: circuit.straight_frame_to_global(edge, [spec.along_offset, spec.plane_offset]),
        heading: Circuit::straight_heading(edge),
    })
}

impl Sweep {
    pub fn duration(&self) -> f64 {
        self.spec.duration()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.passes == 0
    }

    /// `(along, z)` in the raster plane after `d` metres of travel.
    fn plane_point(&self, d: f64) -> (f64, f64) {
        let sp = &self.spec;
        let h = sp.horizontal_span;
        let step = sp.step();
        let r = 0.5 * step;
        let turn = PI * r;
        let first = if sp.forward_first { 1.0 } else { -1.0 };
        let mut d = d.clamp(0.0, sp.path_length());
        for k in 0..sp.passes {
            let dir = if k % 2 == 0 { first } else { -first };
            let z = sp.start_height + k as f64 * step;
            let x_start = -dir * 0.5 * h;
            if d <= h || k + 1 == sp.passes {
                return (x_start + dir * d.min(h), z);
            }
            d -= h;
            if d <= turn {
                let a = if r > 0.0 { d / r } else { 0.0 };
                return (dir * (0.5 * h + r * a.sin()), z + r - r * a.cos());
            }
            d -= turn;
        }
        (0.0, sp.start_height)
    }

    /// Global tool target (mm) `t` seconds into the sweep.
    pub fn target(&self, t: f64) -> EndEffectorPose {
        let (along, z) = self.plane_point(self.spec.speed * t);
        let (s, c) = self.heading.sin_cos();
        EndEffectorPose {
            x: (self.origin[0] + c * along) * 1000.0,
            y: (self.origin[1] + s * along) * 1000.0,
            z: z * 1000.0,
            phi: self.spec.pitch,
        }
    }

    /// Targets on a uniform grid from `t = 0` through the end of the sweep.
    pub fn samples(&self, dt: f64) -> Vec<EndEffectorPose> {
        if self.is_empty() {
            return Vec::new();
        }
        let n = (self.duration() / dt + 1e-9).floor() as usize;
        (0..=n).map(|k| self.target(k as f64 * dt)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::{build_circuit, CircuitSpec};

    fn circuit() -> Circuit {
        build_circuit(CircuitSpec::default()).unwrap()
    }

    #[test]
    fn full_edge_sweep_is_accepted() {
        let c = circuit();
        let spec = SweepSpec {
            passes: 1,
            horizontal_span: 1.4 * 2.956,
            ..SweepSpec::default()
        };
        assert!((spec.path_length() - 4.1384).abs() < 1e-12);
        let sweep = build_sweep(1, &spec, &c).unwrap();
        assert!((sweep.duration() - c.edge_time()).abs() < 1e-12);
        let longer = SweepSpec {
            horizontal_span: 4.2,
            ..spec
        };
        assert!(matches!(
            build_sweep(1, &longer, &c),
            Err(MissionError::InfeasibleSweep { edge: 1, .. })
        ));
    }

    #[test]
    fn zero_passes_is_empty() {
        let spec = SweepSpec {
            passes: 0,
            ..SweepSpec::default()
        };
        let sweep = build_sweep(2, &spec, &circuit()).unwrap();
        assert_eq!(sweep.duration(), 0.0);
        assert!(sweep.samples(0.001).is_empty());
    }

    #[test]
    fn tool_moves_at_constant_speed() {
        let sweep = build_sweep(3, &SweepSpec::default(), &circuit()).unwrap();
        let dt = 1e-3;
        let pts = sweep.samples(dt);
        for w in pts.windows(2) {
            let d = ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2) + (w[1].z - w[0].z).powi(2)).sqrt();
            // Chords on the turnarounds are a hair shorter than the arc.
            assert!((d / 1000.0 / dt - 1.4).abs() < 1e-3, "{d}");
        }
    }

    #[test]
    fn raster_lies_in_its_plane() {
        let c = circuit();
        let spec = SweepSpec::default();
        for edge in 1..=4 {
            let sweep = build_sweep(edge, &spec, &c).unwrap();
            for p in sweep.samples(0.01) {
                let local = c.global_to_straight_frame(edge, [p.x / 1000.0, p.y / 1000.0]);
                assert!((local[1] - spec.plane_offset).abs() < 1e-12);
                assert!(local[0].abs() <= 0.5 * spec.horizontal_span + 0.5 * spec.vertical_span + 1e-12);
                assert!(p.z >= 600.0 - 1e-9 && p.z <= 1100.0 + 1e-9);
            }
        }
    }
}
