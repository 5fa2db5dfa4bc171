//! Whole-mission plan: timing of both stages, the chassis speed profile and
//! the sampled chassis and arm references.

use super::{
    assign_fires, build_sweep, dispatch, mission_step, Circuit, CircuitSpec, DispatchSpec, Dispatched, FireSpot,
    MissionCommand, MissionError, MissionEvent, MissionState, ProfilePiece, ReachModel, SpeedProfile, StopPlan,
    Sweep, SweepSpec, TimedTrajectory,
};
use crate::arm_control::{unwrap_angles, ArmMount, ArmReferenceSample};
use crate::chassis_control::{ChassisReferenceSample, ChassisTrajectory};
use crate::kinematics::{EndEffectorPose, JointAngles, JointVector, Manipulator, ToolOffset};
use std::f64::consts::PI;

/// Fire-test class and extinguisher data.
#[derive(Debug, Clone, PartialEq)]
pub struct FireTestSpec {
    pub class: String,
    /// Side of the square crib centred on the circuit, m.
    pub crib_side: f64,
    /// Extinguisher discharge time, s.
    pub discharge_time: f64,
    /// Time allotted to residual-flame servicing, s.
    pub stage2_budget: f64,
}

impl Default for FireTestSpec {
    fn default() -> Self {
        Self {
            class: "20A".into(),
            crib_side: 0.5,
            discharge_time: 15.0,
            stage2_budget: 3.0,
        }
    }
}

impl FireTestSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.crib_side > 0.0 && self.crib_side.is_finite()) {
            return Err("crib side must be positive".into());
        }
        if !(self.discharge_time > 0.0 && self.discharge_time.is_finite()) {
            return Err("discharge time must be positive".into());
        }
        if !(self.stage2_budget >= 0.0 && self.stage2_budget.is_finite()) {
            return Err("stage II budget must be non-negative".into());
        }
        Ok(())
    }
}

/// Arm configuration for spraying from above at `K5`. The base yaw is not
/// configured: it points from the chassis toward the crib centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopSprayConfig {
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    /// Extra time spent spraying from the top, s.
    pub duration: f64,
}

impl Default for TopSprayConfig {
    fn default() -> Self {
        Self {
            theta2: 135f64.to_radians(),
            theta3: 15.5f64.to_radians(),
            theta4: -45f64.to_radians(),
            duration: 0.0,
        }
    }
}

/// Everything needed to plan a mission.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionSpec {
    pub fire_test: FireTestSpec,
    pub circuit: CircuitSpec,
    pub sweep: SweepSpec,
    pub arm: Manipulator,
    pub tool: ToolOffset,
    pub mount: ArmMount,
    pub top_spray: TopSprayConfig,
    pub fires: Vec<FireSpot>,
    /// Cruise speed, braking limit and timing floors for servicing. The
    /// budget and entry speed are filled in from the rest of the spec.
    pub dispatch: DispatchSpec,
    /// Shortest time the arm gets to move between two sweeps, s.
    pub min_transfer: f64,
    /// Pitch grid for reachability checks, rad.
    pub pitch_step: f64,
    /// Spacing of candidate stop positions, m.
    pub search_step: f64,
}

impl Default for MissionSpec {
    fn default() -> Self {
        Self {
            fire_test: FireTestSpec::default(),
            circuit: CircuitSpec::default(),
            sweep: SweepSpec::default(),
            arm: Manipulator::default(),
            tool: ToolOffset::default(),
            mount: ArmMount::default(),
            top_spray: TopSprayConfig::default(),
            fires: default_fires(),
            dispatch: DispatchSpec::default(),
            min_transfer: 0.3,
            pitch_step: 1f64.to_radians(),
            search_step: 0.01,
        }
    }
}

/// Two residual flames on the near side of the crib.
pub fn default_fires() -> Vec<FireSpot> {
    vec![
        FireSpot::new("F1", [0.22, -0.25, 0.5]),
        FireSpot::new("F2", [0.25, -0.25, 0.35]),
    ]
}

impl MissionSpec {
    pub fn reach_model(&self) -> ReachModel {
        ReachModel {
            arm: self.arm.clone(),
            mount: self.mount,
            tool: self.tool,
            pitch_step: self.pitch_step,
            search_step: self.search_step,
        }
    }
}

/// Time span of one mission state.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub state: MissionState,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionPlan {
    pub spec: MissionSpec,
    pub circuit: Circuit,
    pub sweeps: Vec<Sweep>,
    pub stops: StopPlan,
    pub dispatched: Dispatched,
    pub trajectory: TimedTrajectory,
    pub top_config: JointAngles,
    pub phases: Vec<Phase>,
    /// Named instants, sorted by time.
    pub events: Vec<(f64, String)>,
    pub stage1_time: f64,
    pub top_spray_time: f64,
    pub stage2_time: f64,
}

/// Chassis and arm references at one grid instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSample {
    pub t: f64,
    pub state: String,
    pub chassis: ChassisReferenceSample,
    pub arm: ArmReferenceSample,
    /// Global tool target, mm.
    pub target: [f64; 3],
    pub in_sweep: bool,
    /// Events falling on this sample, `;`-separated.
    pub event: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledMission {
    pub dt: f64,
    pub samples: Vec<ReferenceSample>,
}

/// Quintic Hermite blend between two joint states (angle, rate and
/// acceleration) over `duration`, evaluated `tau` seconds after its start.
pub fn hermite(from: &ArmReferenceSample, to: &ArmReferenceSample, duration: f64, tau: f64) -> ArmReferenceSample {
    blend(from, to, duration, duration, tau)
}

/// `w·f(τ/w)` with `f(u) = u − 6u³ + 8u⁴ − 3u⁵` on `[0, w]`, zero after:
/// unit slope at zero, flat to second order at both `0` (curvature) and `w`.
fn rate_fade(tau: f64, w: f64) -> (f64, f64, f64) {
    if tau >= w || w <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = tau / w;
    let (u2, u3) = (u * u, u * u * u);
    (
        w * (u - 6.0 * u3 + 8.0 * u2 * u2 - 3.0 * u2 * u3),
        1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u2 * u2,
        (-36.0 * u + 96.0 * u2 - 60.0 * u3) / w,
    )
}

/// `w²·u²(1 − u)³/2` with `u = τ/w` on `[0, w]`, zero after: unit second
/// derivative at zero, flat to second order at `w`.
fn accel_fade(tau: f64, w: f64) -> (f64, f64, f64) {
    if tau >= w || w <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = tau / w;
    let v = 1.0 - u;
    (
        0.5 * w * w * u * u * v * v * v,
        0.5 * w * (2.0 * u * v * v * v - 3.0 * u * u * v * v),
        0.5 * (2.0 * v * v * v - 12.0 * u * v * v + 6.0 * u * u * v),
    )
}

/// Smooth step from `from` to `to` over `duration` matching angle, rate and
/// acceleration at both ends. The end rates and accelerations fade out (and
/// in) within `fade` seconds; with `fade == duration` the curve is the
/// quintic Hermite, and shorter fades keep it closer to the straight
/// joint-space segment.
pub fn blend(
    from: &ArmReferenceSample,
    to: &ArmReferenceSample,
    duration: f64,
    fade: f64,
    tau: f64,
) -> ArmReferenceSample {
    if duration <= 0.0 {
        return *to;
    }
    let h = duration;
    let tau = tau.clamp(0.0, h);
    let s = tau / h;
    let (s2, s3) = (s * s, s * s * s);
    let m = (
        10.0 * s3 - 15.0 * s2 * s2 + 6.0 * s2 * s3,
        (30.0 * s2 - 60.0 * s3 + 30.0 * s2 * s2) / h,
        (60.0 * s - 180.0 * s2 + 120.0 * s3) / (h * h),
    );
    let fade = fade.min(h);
    let r0 = rate_fade(tau, fade);
    let a0 = accel_fade(tau, fade);
    let r1 = rate_fade(h - tau, fade);
    let a1 = accel_fade(h - tau, fade);
    let dq = to.q - from.q;
    ArmReferenceSample {
        q: from.q + dq * m.0 + from.qd * r0.0 + from.qdd * a0.0 - to.qd * r1.0 + to.qdd * a1.0,
        qd: dq * m.1 + from.qd * r0.1 + from.qdd * a0.1 + to.qd * r1.1 - to.qdd * a1.1,
        qdd: dq * m.2 + from.qd * r0.2 + from.qdd * a0.2 - to.qd * r1.2 + to.qdd * a1.2,
    }
}

/// Slack for snapping instants onto the sample grid.
const GRID_SLACK: f64 = 1e-9;

fn grid_index(t: f64, dt: f64) -> usize {
    (t / dt - GRID_SLACK).ceil().max(0.0) as usize
}

/// Appends a piece that starts at rest, whatever the current speed.
fn push_at_rest(profile: &mut SpeedProfile, duration: f64) {
    if duration <= 0.0 {
        return;
    }
    let t0 = profile.end_time();
    let (s0, _) = profile.end_state();
    profile.pieces.push(ProfilePiece {
        t0,
        t1: t0 + duration,
        s0,
        v0: 0.0,
        a: 0.0,
    });
}

fn rest(q: JointVector) -> ArmReferenceSample {
    ArmReferenceSample {
        q,
        ..ArmReferenceSample::default()
    }
}

fn shift_near(angle: f64, anchor: f64) -> f64 {
    angle + ((anchor - angle) / (2.0 * PI)).round() * 2.0 * PI
}

impl MissionPlan {
    pub fn new(spec: &MissionSpec) -> Result<Self, MissionError> {
        spec.fire_test.validate().map_err(MissionError::InvalidSpec)?;
        if !(spec.top_spray.duration >= 0.0 && spec.top_spray.duration.is_finite()) {
            return Err(MissionError::InvalidSpec("top-spray duration must be non-negative".into()));
        }
        if !(spec.min_transfer >= 0.0 && spec.pitch_step > 0.0 && spec.search_step > 0.0) {
            return Err(MissionError::InvalidSpec("timing and search steps must be positive".into()));
        }
        let circuit = Circuit::new(spec.circuit.clone())?;
        let edge_time = circuit.edge_time();
        let speed = spec.circuit.speed;
        let sweeps = (1..=4)
            .map(|edge| build_sweep(edge, &spec.sweep, &circuit))
            .collect::<Result<Vec<_>, _>>()?;
        for sweep in &sweeps {
            let window = edge_time - sweep.duration();
            if window + GRID_SLACK < spec.min_transfer {
                return Err(MissionError::InfeasibleSweep {
                    edge: sweep.edge,
                    reason: format!(
                        "leaves {window:.4} s for the arm to move on; at least {:.4} s is needed",
                        spec.min_transfer
                    ),
                });
            }
        }

        let stage1_time = 4.0 * edge_time;
        let top_time = spec.top_spray.duration;
        let k5 = circuit.k_points()[4].pose;
        let to_centre = (spec.circuit.center[1] - k5.y).atan2(spec.circuit.center[0] - k5.x) - k5.phi;
        let top_config = JointAngles::new(
            crate::math::wrap_angle(to_centre),
            spec.top_spray.theta2,
            spec.top_spray.theta3,
            spec.top_spray.theta4,
        );
        spec.arm.limits.check(&top_config).map_err(|v| {
            MissionError::InvalidSpec(format!("top-spray configuration is out of range: {v}"))
        })?;

        let reach = spec.reach_model();
        let stops = assign_fires(&spec.fires, &circuit, Some(&reach));
        let dispatch_spec = DispatchSpec {
            budget: spec.fire_test.stage2_budget,
            entry_speed: if top_time > 0.0 { 0.0 } else { speed },
            ..spec.dispatch.clone()
        };
        let dispatched = dispatch(&stops, &reach, &dispatch_spec);

        let mut profile = SpeedProfile::default();
        profile.pieces.push(ProfilePiece {
            t0: 0.0,
            t1: stage1_time,
            s0: 0.0,
            v0: speed,
            a: 0.0,
        });
        push_at_rest(&mut profile, top_time);

        let mut events: Vec<(f64, String)> = Vec::new();
        for p in circuit.k_points() {
            events.push((p.s / speed, p.label));
        }
        for p in circuit.a_points() {
            events.push((p.s / speed, p.label));
        }
        for sweep in &sweeps {
            let t0 = (sweep.edge - 1) as f64 * edge_time;
            events.push((t0, format!("sweep_start_{}", sweep.edge)));
            events.push((t0 + sweep.duration(), format!("sweep_end_{}", sweep.edge)));
        }
        events.push((stage1_time, "topspray".into()));

        let n_stops = dispatched.commands.len() / 2;
        let mut state = MissionState::Home;
        let mut phases = Vec::new();
        let mut t = 0.0;
        let advance = |state: &mut MissionState, event: MissionEvent, phases: &mut Vec<Phase>, t0: f64, t1: f64| {
            phases.push(Phase {
                state: *state,
                t0,
                t1,
            });
            *state = mission_step(*state, event, n_stops)?;
            Ok::<(), MissionError>(())
        };
        advance(&mut state, MissionEvent::Start, &mut phases, 0.0, 0.0)?;
        for sweep in &sweeps {
            let t_end = t + sweep.duration();
            advance(&mut state, MissionEvent::SweepDone, &mut phases, t, t_end)?;
            advance(&mut state, MissionEvent::EdgeDone, &mut phases, t_end, t + edge_time)?;
            t += edge_time;
        }
        let t2 = stage1_time + top_time;
        advance(&mut state, MissionEvent::TopSprayDone, &mut phases, stage1_time, t2)?;
        t = t2;
        if n_stops > 0 {
            events.push((t2, "stage2_start".into()));
        }
        for command in &dispatched.commands {
            match command {
                MissionCommand::Drive {
                    stop,
                    distance,
                    duration,
                    ..
                } => {
                    let before = profile.end_time();
                    profile.push_drive(*distance, dispatch_spec.cruise_speed, dispatch_spec.max_accel);
                    let spent = profile.end_time() - before;
                    push_at_rest(&mut profile, duration - spent);
                    advance(&mut state, MissionEvent::ArrivedAtStop, &mut phases, t, t + duration)?;
                    t += duration;
                    events.push((t, format!("C{}", stop + 1)));
                    events.push((t, format!("spray_start_{}", stop + 1)));
                }
                MissionCommand::ReachAndSpray { stop, dwell, .. } => {
                    push_at_rest(&mut profile, *dwell);
                    advance(&mut state, MissionEvent::SprayDone, &mut phases, t, t + dwell)?;
                    t += dwell;
                    events.push((t, format!("spray_end_{}", stop + 1)));
                }
            }
        }
        if n_stops > 0 {
            events.push((t, "stage2_end".into()));
        }
        phases.push(Phase { state, t0: t, t1: t });
        events.push((t, "end".into()));
        events.sort_by(|a, b| a.0.total_cmp(&b.0));

        Ok(Self {
            spec: spec.clone(),
            trajectory: TimedTrajectory {
                circuit: circuit.clone(),
                profile,
            },
            circuit,
            sweeps,
            stops,
            dispatched,
            top_config,
            phases,
            events,
            stage1_time,
            top_spray_time: top_time,
            stage2_time: t - t2,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.stage1_time + self.top_spray_time + self.stage2_time
    }

    /// Whether the mission ends before the extinguisher is empty.
    pub fn within_discharge_time(&self) -> bool {
        self.total_time() < self.spec.fire_test.discharge_time
    }

    /// State in force at `t`.
    pub fn state_at(&self, t: f64) -> MissionState {
        self.phases
            .iter()
            .find(|p| p.t0 - GRID_SLACK <= t && t < p.t1 - GRID_SLACK)
            .or(self.phases.last())
            .map_or(MissionState::End, |p| p.state)
    }

    /// Samples the chassis and arm references on a uniform grid from `0`
    /// to the end of the mission.
    pub fn sample_references(&self, dt: f64) -> Result<SampledMission, MissionError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(MissionError::InvalidSpec("time step must be positive".into()));
        }
        let spec = &self.spec;
        let edge_time = self.circuit.edge_time();
        let total = self.total_time();
        let n = grid_index(total, dt);
        let time = |k: usize| k as f64 * dt;
        let chassis: Vec<ChassisReferenceSample> = (0..=n).map(|k| self.trajectory.sample(time(k))).collect();

        let mut arm: Vec<Option<ArmReferenceSample>> = vec![None; n + 1];
        let mut targets: Vec<Option<[f64; 3]>> = vec![None; n + 1];
        let mut in_sweep = vec![false; n + 1];
        let mut last_yaw = 0.0;
        let mut windows = Vec::new();
        for sweep in &self.sweeps {
            let t0 = (sweep.edge - 1) as f64 * edge_time;
            let k0 = grid_index(t0, dt);
            let k1 = ((t0 + sweep.duration()) / dt + GRID_SLACK).floor() as usize;
            let mut q = Vec::new();
            for k in k0..=k1.min(n) {
                let target = sweep.target(time(k) - t0);
                let local = spec.mount.to_base(&chassis[k].pose, &target);
                let sol = spec
                    .arm
                    .inverse_kinematics(&local, spec.tool)
                    .map_err(|e| MissionError::InfeasibleSweep {
                        edge: sweep.edge,
                        reason: format!("no arm solution at t = {:.3} s: {e}", time(k)),
                    })?;
                q.push(sol.as_vector());
                targets[k] = Some([target.x, target.y, target.z]);
                in_sweep[k] = true;
            }
            if q.is_empty() {
                continue;
            }
            let mut yaw: Vec<f64> = q.iter().map(|v| v[0]).collect();
            yaw[0] = shift_near(yaw[0], last_yaw);
            unwrap_angles(&mut yaw);
            last_yaw = *yaw.last().expect("non-empty");
            for (v, y) in q.iter_mut().zip(yaw) {
                v[0] = y;
            }
            let (qd, qdd) = crate::arm_control::differentiate(&q, dt);
            for (i, k) in (k0..=k1.min(n)).enumerate() {
                arm[k] = Some(ArmReferenceSample {
                    q: q[i],
                    qd: qd[i],
                    qdd: qdd[i],
                });
            }
            windows.push((sweep.edge, k0, k1.min(n)));
        }

        let mut top = self.top_config;
        top.theta1 = shift_near(top.theta1, last_yaw);
        let top_q = top.as_vector();
        let k_top = grid_index(self.stage1_time, dt);

        // Arm moves between sweeps, and on to the top-spray configuration.
        for (i, &(edge, _, k_end)) in windows.iter().enumerate() {
            let from = arm[k_end].expect("sweep sample");
            let (k_next, to) = match windows.get(i + 1) {
                Some(&(_, k0, _)) => (k0, arm[k0].expect("sweep sample")),
                None => (k_top, rest(top_q)),
            };
            let span = time(k_next) - time(k_end);
            let last = if i + 1 < windows.len() { k_next - 1 } else { k_next.min(n) };
            let mut fade = span;
            let mut path = None;
            for _ in 0..16 {
                let candidate: Vec<ArmReferenceSample> = (k_end + 1..=last)
                    .map(|k| blend(&from, &to, span, fade, time(k) - time(k_end)))
                    .collect();
                if candidate
                    .iter()
                    .all(|s| spec.arm.limits.contains(&JointAngles::from_vector(&s.q)))
                {
                    path = Some(candidate);
                    break;
                }
                fade *= 0.5;
            }
            let path = path.ok_or_else(|| MissionError::InfeasibleSweep {
                edge,
                reason: "no transfer to the next configuration stays inside the joint ranges".into(),
            })?;
            for (k, s) in (k_end + 1..=last).zip(path) {
                arm[k] = Some(s);
            }
        }

        // Servicing: reach each flame while driving to its stop, then hold.
        let mut hold = top_q;
        let mut t = self.stage1_time + self.top_spray_time;
        for command in &self.dispatched.commands {
            match command {
                MissionCommand::Drive { duration, stop, .. } => {
                    let q_next = match &self.dispatched.commands[2 * stop + 1] {
                        MissionCommand::ReachAndSpray { q, .. } => {
                            let mut q = *q;
                            q.theta1 = shift_near(q.theta1, hold[0]);
                            q.as_vector()
                        }
                        MissionCommand::Drive { .. } => unreachable!("commands alternate"),
                    };
                    let k_start = grid_index(t, dt);
                    for j in k_start..=grid_index(t + duration, dt).min(n) {
                        if arm[j].is_none() {
                            arm[j] = Some(hermite(&rest(hold), &rest(q_next), *duration, time(j) - t));
                        }
                    }
                    hold = q_next;
                    t += duration;
                }
                MissionCommand::ReachAndSpray { dwell, .. } => {
                    for j in grid_index(t, dt)..=grid_index(t + dwell, dt).min(n) {
                        arm[j].get_or_insert(rest(hold));
                    }
                    t += dwell;
                }
            }
        }
        for a in arm.iter_mut().filter(|a| a.is_none()) {
            *a = Some(rest(hold));
        }

        let mut event_text = vec![String::new(); n + 1];
        for (te, label) in &self.events {
            let k = grid_index(*te, dt).min(n);
            if !event_text[k].is_empty() {
                event_text[k].push(';');
            }
            event_text[k].push_str(label);
        }

        let samples = (0..=n)
            .map(|k| {
                let arm = arm[k].expect("every sample filled");
                let target = targets[k].unwrap_or_else(|| {
                    spec.mount
                        .tool_position(&spec.arm, spec.tool, &chassis[k].pose, &JointAngles::from_vector(&arm.q))
                });
                ReferenceSample {
                    t: time(k),
                    state: self.state_at(time(k)).to_string(),
                    chassis: chassis[k],
                    arm,
                    target,
                    in_sweep: in_sweep[k],
                    event: std::mem::take(&mut event_text[k]),
                }
            })
            .collect();
        Ok(SampledMission { dt, samples })
    }
}

impl ReferenceSample {
    /// Tool target as a pose with zero pitch, mm.
    pub fn target_pose(&self) -> EndEffectorPose {
        EndEffectorPose::new(self.target[0], self.target[1], self.target[2], 0.0)
    }
}
