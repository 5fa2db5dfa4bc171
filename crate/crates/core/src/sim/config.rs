//! Scenario files: TOML with every block optional.
//!
//! Arm constants are in mm and degrees; chassis, circuit and planner
//! quantities are in m, s and degrees.

use super::SimError;
use crate::arm_control::{ArmGains, ArmMount};
use crate::chassis_control::{ChassisGains, DisturbanceSpec};
use crate::dynamics::{ArmDynamics, ArmGeometry, LinkInertia, LinkInertialParams};
use crate::integrator::Integrator;
use crate::kinematics::{DhTable, JointLimits, KeyPoint, Manipulator, ToolOffset, WorkspaceOptions};
use crate::mission::{
    CircuitSpec, DispatchSpec, FireSpot, FireTestSpec, MissionPlan, MissionSpec, SweepSpec, TopSprayConfig,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    /// Control and logging period, s.
    pub dt: f64,
    pub integrator: Integrator,
    pub arm: ArmConfig,
    pub inertia: InertiaConfig,
    pub arm_gains: ArmGainsConfig,
    pub chassis: ChassisConfig,
    pub chassis_gains: ChassisGainsConfig,
    pub disturbance: DisturbanceConfig,
    pub fire_test: FireTestConfig,
    pub circuit: CircuitConfig,
    pub sweep: SweepConfig,
    pub stage2: Stage2Config,
    pub top_spray: TopSprayConfigFile,
    pub fires: Vec<FireConfig>,
    pub metrics: MetricsConfig,
    pub workspace: WorkspaceConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "default-20A".into(),
            seed: 0,
            dt: 0.001,
            integrator: Integrator::Rk4,
            arm: ArmConfig::default(),
            inertia: InertiaConfig::default(),
            arm_gains: ArmGainsConfig::default(),
            chassis: ChassisConfig::default(),
            chassis_gains: ChassisGainsConfig::default(),
            disturbance: DisturbanceConfig::default(),
            fire_test: FireTestConfig::default(),
            circuit: CircuitConfig::default(),
            sweep: SweepConfig::default(),
            stage2: Stage2Config::default(),
            top_spray: TopSprayConfigFile::default(),
            fires: crate::mission::default_fires()
                .into_iter()
                .map(|f| FireConfig {
                    id: f.id,
                    position: f.position,
                })
                .collect(),
            metrics: MetricsConfig::default(),
            workspace: WorkspaceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmConfig {
    /// Link lengths `a1..a5`, mm.
    pub a: [f64; 5],
    /// Base height `d1`, mm.
    pub d1: f64,
    /// Base twist `α1`, degrees.
    pub alpha1: f64,
    /// Tool offset along the last frame's y-axis, mm.
    pub y5p: f64,
    /// Arm base position on the chassis (forward, left), m.
    pub mount_offset: [f64; 2],
    /// Arm base height above the ground, m.
    pub mount_height: f64,
    pub limits: LimitsConfig,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self {
            a: [100.0, 1000.0, 1700.0, 100.0, 80.0],
            d1: 185.0,
            alpha1: 90.0,
            y5p: 0.0,
            mount_offset: [0.0, 0.0],
            mount_height: 0.0,
            limits: LimitsConfig::default(),
        }
    }
}

/// Joint ranges in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsConfig {
    pub min: [f64; 4],
    pub max: [f64; 4],
    pub interior_min: f64,
    pub interior_max: f64,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self {
            min: [-180.0, 0.0, -120.0, -90.0],
            max: [180.0, 135.0, 15.5, 0.0],
            interior_min: 30.0,
            interior_max: 165.0,
        }
    }
}

/// Explicit link properties, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub mass: f64,
    /// Centre of mass along the link, m.
    pub com: f64,
    /// Centroidal moment of inertia, kg·m².
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InertiaConfig {
    /// Arm mass split over the links by length when `links` is empty, kg.
    pub total_mass: f64,
    pub payload: f64,
    pub gravity: f64,
    /// Viscous joint damping, N·m·s/rad.
    pub damping: [f64; 4],
    /// Base, link 2, link 3 and the last link, in that order.
    pub links: Vec<LinkConfig>,
}

impl Default for InertiaConfig {
    fn default() -> Self {
        Self {
            total_mass: 400.0,
            payload: 20.0,
            gravity: 9.81,
            damping: [0.0; 4],
            links: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmGainsConfig {
    pub lambda: f64,
    pub k: [f64; 4],
    /// Saturation width; zero selects the pure sign function.
    pub boundary_layer: f64,
    /// Per-joint torque bound, N·m.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torque_limit: Option<[f64; 4]>,
}

impl Default for ArmGainsConfig {
    fn default() -> Self {
        let g = ArmGains::default();
        Self {
            lambda: g.lambda,
            k: g.k,
            boundary_layer: g.boundary_layer,
            torque_limit: g.torque_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChassisConfig {
    /// Circuit speed, m/s.
    pub speed: f64,
    /// Distance between the tracks, m.
    pub track_width: f64,
    /// Initial position offset from the reference (forward, left), m.
    pub initial_offset: [f64; 2],
    /// Initial heading offset, degrees.
    pub initial_heading: f64,
}

impl Default for ChassisConfig {
    fn default() -> Self {
        Self {
            speed: 0.88,
            track_width: 0.8,
            initial_offset: [0.0, 0.0],
            initial_heading: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChassisGainsConfig {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub q: [f64; 2],
    pub p: [f64; 2],
    /// Lateral offset of the tracked point, m.
    pub offset: f64,
    pub f_max: [f64; 2],
    pub boundary_layer: f64,
}

impl Default for ChassisGainsConfig {
    fn default() -> Self {
        let g = ChassisGains::default();
        Self {
            k1: g.k1,
            k2: g.k2,
            k3: g.k3,
            q: g.q,
            p: g.p,
            offset: g.offset,
            f_max: g.f_max,
            boundary_layer: g.boundary_layer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisturbanceKind {
    #[default]
    None,
    Constant,
    Sine,
    Noise,
}

/// Chassis disturbance. `amplitude` is the constant value for `constant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceConfig {
    pub kind: DisturbanceKind,
    pub amplitude: [f64; 2],
    /// Hz.
    pub frequency: [f64; 2],
    /// Degrees.
    pub phase: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FireTestConfig {
    pub class: String,
    pub crib_side: f64,
    pub discharge_time: f64,
    pub stage2_budget: f64,
}

impl Default for FireTestConfig {
    fn default() -> Self {
        let f = FireTestSpec::default();
        Self {
            class: f.class,
            crib_side: f.crib_side,
            discharge_time: f.discharge_time,
            stage2_budget: f.stage2_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    pub center: [f64; 2],
    /// Path length between consecutive K points, m.
    pub edge_length: f64,
    pub corner_radius: f64,
    pub min_radius: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        let c = CircuitSpec::default();
        Self {
            center: c.center,
            edge_length: c.edge_length,
            corner_radius: c.corner_radius,
            min_radius: c.min_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub passes: usize,
    pub horizontal_span: f64,
    pub vertical_span: f64,
    /// End-effector speed, m/s.
    pub speed: f64,
    pub start_height: f64,
    pub plane_offset: f64,
    pub along_offset: f64,
    /// Degrees.
    pub pitch: f64,
    pub forward_first: bool,
    /// Shortest time left for the arm to move on after each sweep, s.
    pub min_transfer: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let s = SweepSpec::default();
        Self {
            passes: s.passes,
            horizontal_span: s.horizontal_span,
            vertical_span: s.vertical_span,
            speed: s.speed,
            start_height: s.start_height,
            plane_offset: s.plane_offset,
            along_offset: s.along_offset,
            pitch: 30.0,
            forward_first: s.forward_first,
            min_transfer: MissionSpec::default().min_transfer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stage2Config {
    pub cruise_speed: f64,
    pub max_accel: f64,
    pub min_dwell: f64,
    /// Shortest drive between stops, s.
    pub min_drive: f64,
    /// Spacing of candidate stop positions, m.
    pub search_step: f64,
    /// Pitch grid for reach checks, degrees.
    pub pitch_step: f64,
}

impl Default for Stage2Config {
    fn default() -> Self {
        let d = DispatchSpec::default();
        Self {
            cruise_speed: d.cruise_speed,
            max_accel: d.max_accel,
            min_dwell: d.min_dwell,
            min_drive: d.min_transfer,
            search_step: 0.01,
            pitch_step: 1.0,
        }
    }
}

/// Top-spray configuration in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopSprayConfigFile {
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub duration: f64,
}

impl Default for TopSprayConfigFile {
    fn default() -> Self {
        Self {
            theta2: 135.0,
            theta3: 15.5,
            theta4: -45.0,
            duration: TopSprayConfig::default().duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FireConfig {
    pub id: String,
    /// m.
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Chassis error band `[|e1| mm, |e2| mm, |e3| deg]`.
    pub band: [f64; 3],
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            band: [20.0, 1.0, 0.6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyPointConfig {
    pub label: String,
    /// mm, arm base frame.
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceConfig {
    /// Planar grid step, degrees.
    pub resolution: f64,
    /// Point-cloud grid step, degrees.
    pub cloud_resolution: f64,
    pub key_points: Vec<KeyPointConfig>,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        Self {
            resolution: 0.5,
            cloud_resolution: 5.0,
            key_points: Vec::new(),
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> SimError {
    SimError::Validation {
        key: key.into(),
        message: message.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), SimError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, values: &[f64]) -> Result<(), SimError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(key, "must be finite"))
    }
}

/// Reads and validates a scenario file. An empty file gives the default
/// scenario.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, SimError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| SimError::Io(format!(
        "{}: {e}",
        path.as_ref().display()
    )))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, SimError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn manipulator(&self) -> Manipulator {
        let a = &self.arm;
        let deg = |v: [f64; 4]| v.map(f64::to_radians);
        Manipulator::new(
            DhTable::from_constants(a.a, a.d1, a.alpha1.to_radians()),
            JointLimits {
                min: deg(a.limits.min),
                max: deg(a.limits.max),
                interior_min: a.limits.interior_min.to_radians(),
                interior_max: a.limits.interior_max.to_radians(),
            },
        )
    }

    pub fn tool(&self) -> ToolOffset {
        ToolOffset::new(self.arm.y5p)
    }

    pub fn mount(&self) -> ArmMount {
        ArmMount {
            offset: self.arm.mount_offset,
            height: self.arm.mount_height,
        }
    }

    pub fn inertial_params(&self) -> LinkInertialParams {
        let geom = ArmGeometry::from_model(&self.manipulator(), self.tool());
        let i = &self.inertia;
        let mut p = LinkInertialParams::for_geometry(&geom, i.total_mass, i.payload, i.gravity);
        if i.links.len() == 4 {
            for (dst, src) in p.links.iter_mut().zip(&i.links) {
                *dst = LinkInertia {
                    mass: src.mass,
                    com: src.com,
                    inertia: src.inertia,
                };
            }
        }
        p.damping = i.damping;
        p
    }

    pub fn dynamics(&self) -> ArmDynamics {
        ArmDynamics::new(
            ArmGeometry::from_model(&self.manipulator(), self.tool()),
            self.inertial_params(),
        )
    }

    pub fn arm_gains(&self) -> ArmGains {
        ArmGains {
            lambda: self.arm_gains.lambda,
            k: self.arm_gains.k,
            boundary_layer: self.arm_gains.boundary_layer,
            torque_limit: self.arm_gains.torque_limit,
        }
    }

    pub fn chassis_gains(&self) -> ChassisGains {
        let g = &self.chassis_gains;
        ChassisGains {
            k1: g.k1,
            k2: g.k2,
            k3: g.k3,
            q: g.q,
            p: g.p,
            offset: g.offset,
            f_max: g.f_max,
            boundary_layer: g.boundary_layer,
        }
    }

    pub fn disturbance(&self) -> DisturbanceSpec {
        let d = &self.disturbance;
        match d.kind {
            DisturbanceKind::None => DisturbanceSpec::None,
            DisturbanceKind::Constant => DisturbanceSpec::Constant(d.amplitude),
            DisturbanceKind::Sine => DisturbanceSpec::Sine {
                amplitude: d.amplitude,
                frequency: d.frequency,
                phase: d.phase.map(f64::to_radians),
            },
            DisturbanceKind::Noise => DisturbanceSpec::Noise { amplitude: d.amplitude },
        }
    }

    pub fn mission_spec(&self) -> MissionSpec {
        let s = &self.sweep;
        let t = &self.top_spray;
        let f = &self.fire_test;
        let c = &self.circuit;
        MissionSpec {
            fire_test: FireTestSpec {
                class: f.class.clone(),
                crib_side: f.crib_side,
                discharge_time: f.discharge_time,
                stage2_budget: f.stage2_budget,
            },
            circuit: CircuitSpec {
                center: c.center,
                edge_length: c.edge_length,
                corner_radius: c.corner_radius,
                speed: self.chassis.speed,
                min_radius: c.min_radius,
            },
            sweep: SweepSpec {
                passes: s.passes,
                horizontal_span: s.horizontal_span,
                vertical_span: s.vertical_span,
                speed: s.speed,
                start_height: s.start_height,
                plane_offset: s.plane_offset,
                along_offset: s.along_offset,
                pitch: s.pitch.to_radians(),
                forward_first: s.forward_first,
            },
            arm: self.manipulator(),
            tool: self.tool(),
            mount: self.mount(),
            top_spray: TopSprayConfig {
                theta2: t.theta2.to_radians(),
                theta3: t.theta3.to_radians(),
                theta4: t.theta4.to_radians(),
                duration: t.duration,
            },
            fires: self.fires.iter().map(|f| FireSpot::new(f.id.clone(), f.position)).collect(),
            dispatch: DispatchSpec {
                budget: f.stage2_budget,
                entry_speed: self.chassis.speed,
                cruise_speed: self.stage2.cruise_speed,
                max_accel: self.stage2.max_accel,
                min_dwell: self.stage2.min_dwell,
                min_transfer: self.stage2.min_drive,
            },
            min_transfer: s.min_transfer,
            pitch_step: self.stage2.pitch_step.to_radians(),
            search_step: self.stage2.search_step,
        }
    }

    pub fn plan(&self) -> Result<MissionPlan, SimError> {
        MissionPlan::new(&self.mission_spec()).map_err(SimError::Mission)
    }

    pub fn workspace_options(&self) -> WorkspaceOptions {
        WorkspaceOptions {
            resolution: self.workspace.resolution.to_radians(),
            cloud_resolution: self.workspace.cloud_resolution.to_radians(),
            tool: self.tool(),
            key_points: self
                .workspace
                .key_points
                .iter()
                .map(|k| KeyPoint {
                    label: k.label.clone(),
                    position: k.position,
                })
                .collect(),
            ..WorkspaceOptions::default()
        }
    }

    /// Checks every block; the error names the offending key.
    pub fn validate(&self) -> Result<(), SimError> {
        positive("dt", self.dt)?;

        let a = &self.arm;
        finite("arm.a", &a.a)?;
        if a.a.iter().any(|v| *v < 0.0) {
            return Err(invalid("arm.a", "link lengths must be non-negative"));
        }
        positive("arm.a[1]", a.a[1])?;
        positive("arm.a[2]", a.a[2])?;
        finite("arm.d1", &[a.d1, a.alpha1])?;
        if a.d1 < 0.0 {
            return Err(invalid("arm.d1", "must be non-negative"));
        }
        finite("arm.y5p", &[a.y5p])?;
        finite("arm.mount_offset", &a.mount_offset)?;
        finite("arm.mount_height", &[a.mount_height])?;
        self.manipulator()
            .limits
            .validate()
            .map_err(|m| invalid("arm.limits", m))?;

        let i = &self.inertia;
        if !(i.links.is_empty() || i.links.len() == 4) {
            return Err(invalid("inertia.links", "give either no links or exactly four"));
        }
        if i.links.is_empty() {
            positive("inertia.total_mass", i.total_mass)?;
        }
        self.inertial_params()
            .validate()
            .map_err(|e| invalid("inertia", e.to_string()))?;

        self.arm_gains()
            .validate()
            .map_err(|m| invalid("arm_gains", m))?;

        positive("chassis.speed", self.chassis.speed)?;
        positive("chassis.track_width", self.chassis.track_width)?;
        finite("chassis.initial_offset", &self.chassis.initial_offset)?;
        finite("chassis.initial_heading", &[self.chassis.initial_heading])?;

        let gains = self.chassis_gains();
        gains.validate().map_err(|m| invalid("chassis_gains", m))?;

        let d = &self.disturbance;
        finite("disturbance", &[d.amplitude, d.frequency, d.phase].concat())?;
        let peak = self.disturbance().peak();
        for axis in 0..2 {
            if peak[axis] > gains.f_max[axis] {
                return Err(invalid(
                    "disturbance.amplitude",
                    format!("axis {} peak {} exceeds chassis_gains.f_max {}", axis + 1, peak[axis], gains.f_max[axis]),
                ));
            }
        }

        let f = &self.fire_test;
        positive("fire_test.crib_side", f.crib_side)?;
        positive("fire_test.discharge_time", f.discharge_time)?;
        if !(f.stage2_budget >= 0.0 && f.stage2_budget.is_finite()) {
            return Err(invalid("fire_test.stage2_budget", "must be non-negative"));
        }

        finite("circuit.center", &self.circuit.center)?;
        positive("circuit.edge_length", self.circuit.edge_length)?;
        positive("circuit.corner_radius", self.circuit.corner_radius)?;

        let s = &self.sweep;
        positive("sweep.speed", s.speed)?;
        if !(s.horizontal_span >= 0.0) {
            return Err(invalid("sweep.horizontal_span", "must be non-negative"));
        }
        if !(s.vertical_span >= 0.0) {
            return Err(invalid("sweep.vertical_span", "must be non-negative"));
        }
        if !(0.0..=90.0).contains(&s.pitch) {
            return Err(invalid("sweep.pitch", "must lie in [0, 90] degrees"));
        }
        if !(s.min_transfer >= 0.0) {
            return Err(invalid("sweep.min_transfer", "must be non-negative"));
        }

        let st = &self.stage2;
        positive("stage2.cruise_speed", st.cruise_speed)?;
        positive("stage2.max_accel", st.max_accel)?;
        positive("stage2.search_step", st.search_step)?;
        positive("stage2.pitch_step", st.pitch_step)?;
        if !(st.min_dwell >= 0.0) {
            return Err(invalid("stage2.min_dwell", "must be non-negative"));
        }
        if !(st.min_drive >= 0.0) {
            return Err(invalid("stage2.min_drive", "must be non-negative"));
        }

        if !(self.top_spray.duration >= 0.0 && self.top_spray.duration.is_finite()) {
            return Err(invalid("top_spray.duration", "must be non-negative"));
        }

        for (n, fire) in self.fires.iter().enumerate() {
            finite(&format!("fires[{n}].position"), &fire.position)?;
            if self.fires[..n].iter().any(|other| other.id == fire.id) {
                return Err(invalid(&format!("fires[{n}].id"), format!("duplicate id {:?}", fire.id)));
            }
        }

        for (n, b) in self.metrics.band.iter().enumerate() {
            positive(&format!("metrics.band[{n}]"), *b)?;
        }
        positive("workspace.resolution", self.workspace.resolution)?;
        positive("workspace.cloud_resolution", self.workspace.cloud_resolution)?;

        self.plan().map(|_| ()).map_err(|e| match e {
            SimError::Mission(m) => invalid(mission_key(&m), m.to_string()),
            other => other,
        })
    }
}

fn mission_key(e: &crate::mission::MissionError) -> &'static str {
    use crate::mission::MissionError as M;
    match e {
        M::GeometryError(_) => "circuit",
        M::InfeasibleSweep { .. } => "sweep",
        M::UnreachableFlame { .. } => "fires",
        M::IllegalTransition { .. } | M::InvalidSpec(_) => "top_spray",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_scenario("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
    }

    #[test]
    fn zero_step_names_dt() {
        match parse_scenario("dt = 0.0") {
            Err(SimError::Validation { key, .. }) => assert_eq!(key, "dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        assert!(matches!(parse_scenario("dtt = 0.1"), Err(SimError::Parse(_))));
    }

    #[test]
    fn defaults_round_trip() {
        let c = ScenarioConfig::default();
        let again = parse_scenario(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn nested_keys_are_named() {
        match parse_scenario("[chassis_gains]\np = [0.05, 0.2]") {
            Err(SimError::Validation { key, .. }) => assert_eq!(key, "chassis_gains"),
            other => panic!("{other:?}"),
        }
        match parse_scenario("[sweep]\nspeed = -1.0") {
            Err(SimError::Validation { key, .. }) => assert_eq!(key, "sweep.speed"),
            other => panic!("{other:?}"),
        }
        match parse_scenario("[disturbance]\nkind = \"noise\"\namplitude = [0.5, 0.0]") {
            Err(SimError::Validation { key, .. }) => assert_eq!(key, "disturbance.amplitude"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn defaults_match_the_library() {
        let c = ScenarioConfig::default();
        assert_eq!(c.manipulator(), Manipulator::default());
        assert_eq!(c.chassis_gains(), ChassisGains::default());
        assert_eq!(c.arm_gains(), ArmGains::default());
        let spec = c.mission_spec();
        let lib = MissionSpec::default();
        assert_eq!(spec.sweep, lib.sweep);
        assert_eq!(spec.circuit, lib.circuit);
        assert_eq!(spec.fires, lib.fires);
    }
}
