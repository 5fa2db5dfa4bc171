//! Residual-flame servicing: grouping flames by their nearest tangency point,
//! choosing stop positions on the circuit and turning them into drive and
//! spray commands.

use super::Circuit;
use crate::arm_control::ArmMount;
use crate::chassis_control::ChassisState;
use crate::kinematics::{EndEffectorPose, JointAngles, Manipulator, ToolOffset};

/// A residual flame, position in m.
#[derive(Debug, Clone, PartialEq)]
pub struct FireSpot {
    pub id: String,
    pub position: [f64; 3],
}

impl FireSpot {
    pub fn new(id: impl Into<String>, position: [f64; 3]) -> Self {
        Self {
            id: id.into(),
            position,
        }
    }
}

/// Arm reachability used to place and check stops.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachModel {
    pub arm: Manipulator,
    pub mount: ArmMount,
    pub tool: ToolOffset,
    /// Pitch grid for the reach test, rad.
    pub pitch_step: f64,
    /// Spacing of candidate stops along a straight, m.
    pub search_step: f64,
}

impl ReachModel {
    /// Best configuration reaching `fire` from `chassis`, if any.
    pub fn solve(&self, chassis: &ChassisState, fire: &[f64; 3]) -> Option<JointAngles> {
        let target = EndEffectorPose::new(fire[0] * 1000.0, fire[1] * 1000.0, fire[2] * 1000.0, 0.0);
        let local = self.mount.to_base(chassis, &target);
        self.arm
            .best_pitch(local.x, local.y, local.z, self.tool, self.pitch_step)
            .map(|(q, _)| q)
    }
}

/// One stop of the servicing pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    pub fire: FireSpot,
    /// Straight (1..=4) the stop lies on; the group is `A_{2k−1}A_{2k}`.
    pub group: usize,
    /// Index (1..=8) of the nearest tangency point.
    pub nearest_a: usize,
    /// Signed distance from the straight's midpoint, m.
    pub along: f64,
    /// Path parameter measured from `K5`, in `[0, lap)`, m.
    pub s: f64,
    pub chassis: ChassisState,
}

impl Stop {
    pub fn group_label(&self) -> String {
        format!("A{}A{}", 2 * self.group - 1, 2 * self.group)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StopPlan {
    pub stops: Vec<Stop>,
}

/// Index (1..=8) of the tangency point nearest to `p` in the ground plane;
/// ties go to the lower index.
pub fn nearest_a_point(circuit: &Circuit, p: [f64; 2]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, a) in circuit.a_points().iter().enumerate() {
        let d = (a.pose.x - p[0]).hypot(a.pose.y - p[1]);
        if d < best.0 {
            best = (d, i + 1);
        }
    }
    best.1
}

/// Groups each flame by its nearest tangency point, places its stop on that
/// group's straight and orders the stops for one anticlockwise pass from
/// `K5`.
///
/// The stop starts at the perpendicular projection of the flame onto the
/// straight, clamped to the segment. With a reach model, a projection from
/// which the arm cannot reach the flame is moved along the straight to the
/// nearest candidate (spaced `search_step`, forward first) that can.
pub fn assign_fires(fires: &[FireSpot], circuit: &Circuit, reach: Option<&ReachModel>) -> StopPlan {
    let half = 0.5 * circuit.straight;
    let mut stops: Vec<Stop> = fires
        .iter()
        .map(|fire| {
            let nearest_a = nearest_a_point(circuit, [fire.position[0], fire.position[1]]);
            let group = nearest_a.div_ceil(2);
            let local = circuit.global_to_straight_frame(group, [fire.position[0], fire.position[1]]);
            let mut along = local[0].clamp(-half, half);
            if let Some(model) = reach {
                along = search_reachable(circuit, model, group, along, &fire.position).unwrap_or(along);
            }
            let s = circuit.straight_parameter(group, along);
            Stop {
                fire: fire.clone(),
                group,
                nearest_a,
                along,
                s,
                chassis: circuit.pose_at(s).0,
            }
        })
        .collect();
    stops.sort_by(|a, b| a.s.total_cmp(&b.s));
    StopPlan { stops }
}

fn search_reachable(
    circuit: &Circuit,
    model: &ReachModel,
    group: usize,
    start: f64,
    fire: &[f64; 3],
) -> Option<f64> {
    let half = 0.5 * circuit.straight;
    let reachable = |along: f64| {
        let pose = circuit.pose_at(circuit.straight_parameter(group, along)).0;
        model.solve(&pose, fire).is_some()
    };
    if reachable(start) {
        return Some(start);
    }
    let max_steps = (circuit.straight / model.search_step).ceil() as usize + 1;
    for k in 1..=max_steps {
        let delta = k as f64 * model.search_step;
        let mut any_inside = false;
        for cand in [start + delta, start - delta] {
            if (-half..=half).contains(&cand) {
                any_inside = true;
                if reachable(cand) {
                    return Some(cand);
                }
            }
        }
        if !any_inside {
            break;
        }
    }
    None
}

/// Parameters for turning a stop plan into commands.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSpec {
    /// Time allotted to servicing, s.
    pub budget: f64,
    /// Chassis speed when servicing begins, m/s.
    pub entry_speed: f64,
    pub cruise_speed: f64,
    /// m/s².
    pub max_accel: f64,
    /// Shortest spray per flame, s.
    pub min_dwell: f64,
    /// Shortest time given to the arm between stops, s.
    pub min_transfer: f64,
}

impl Default for DispatchSpec {
    fn default() -> Self {
        Self {
            budget: 3.0,
            entry_speed: 0.88,
            cruise_speed: 0.88,
            max_accel: 2.0,
            min_dwell: 0.1,
            min_transfer: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MissionCommand {
    /// Drive along the circuit and stop at the stop's pose.
    Drive {
        stop: usize,
        target: ChassisState,
        distance: f64,
        duration: f64,
    },
    /// Reach the flame and spray.
    ReachAndSpray {
        stop: usize,
        fire: String,
        q: JointAngles,
        dwell: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedFire {
    pub fire: String,
    pub stop: ChassisState,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dispatched {
    pub commands: Vec<MissionCommand>,
    pub flagged: Vec<FlaggedFire>,
    pub dwell: f64,
    pub drive_time: f64,
    /// Hardest braking required by the drives, m/s².
    pub max_decel: f64,
}

impl Dispatched {
    pub fn total_time(&self) -> f64 {
        self.commands
            .iter()
            .map(|c| match c {
                MissionCommand::Drive { duration, .. } => *duration,
                MissionCommand::ReachAndSpray { dwell, .. } => *dwell,
            })
            .sum()
    }
}

/// Drive time for `distance` from `v0` to rest, with the profile used by
/// the mission.
fn drive_time(distance: f64, v0: f64, spec: &DispatchSpec) -> (f64, f64) {
    let mut p = super::SpeedProfile::default();
    p.pieces.push(super::ProfilePiece {
        t0: 0.0,
        t1: 0.0,
        s0: 0.0,
        v0,
        a: 0.0,
    });
    let decel = p.push_drive(distance, spec.cruise_speed, spec.max_accel);
    (p.end_time(), decel)
}

/// Turns a stop plan into drive / reach-and-spray commands. Flames the arm
/// cannot reach from their stop are flagged and skipped. The spray dwell
/// splits what is left of the budget after driving evenly among the
/// serviced flames, but never drops below `min_dwell`.
pub fn dispatch(plan: &StopPlan, reach: &ReachModel, spec: &DispatchSpec) -> Dispatched {
    let mut flagged = Vec::new();
    let mut serviced = Vec::new();
    for stop in &plan.stops {
        match reach.solve(&stop.chassis, &stop.fire.position) {
            Some(q) => serviced.push((stop, q)),
            None => flagged.push(FlaggedFire {
                fire: stop.fire.id.clone(),
                stop: stop.chassis,
            }),
        }
    }
    let mut drives = Vec::new();
    let mut prev_s = 0.0;
    let mut v0 = spec.entry_speed;
    let mut max_decel: f64 = 0.0;
    for (stop, _) in &serviced {
        let distance = stop.s - prev_s;
        let (t, decel) = drive_time(distance, v0, spec);
        max_decel = max_decel.max(decel);
        drives.push((distance, t.max(spec.min_transfer)));
        prev_s = stop.s;
        v0 = 0.0;
    }
    let drive_total: f64 = drives.iter().map(|d| d.1).sum();
    let dwell = if serviced.is_empty() {
        0.0
    } else {
        ((spec.budget - drive_total) / serviced.len() as f64).max(spec.min_dwell)
    };
    let mut commands = Vec::new();
    for (i, ((stop, q), (distance, duration))) in serviced.iter().zip(drives).enumerate() {
        commands.push(MissionCommand::Drive {
            stop: i,
            target: stop.chassis,
            distance,
            duration,
        });
        commands.push(MissionCommand::ReachAndSpray {
            stop: i,
            fire: stop.fire.id.clone(),
            q: *q,
            dwell,
        });
    }
    Dispatched {
        commands,
        flagged,
        dwell,
        drive_time: drive_total,
        max_decel,
    }
}
