//! Writes a finished run to a directory.

use super::{MetricsReport, SimError, SimLog};
use crate::chassis_control::ChassisState;
use crate::mission::{MissionCommand, MissionPlan};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// File names written by [`export`].
pub const LOG_FILE: &str = "mission.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const ERRORS_FILE: &str = "errors.csv";
pub const TORQUES_FILE: &str = "torques.csv";
pub const WHEELS_FILE: &str = "wheels.csv";

fn io(path: &Path, e: impl std::fmt::Display) -> SimError {
    SimError::Io(format!("{}: {e}", path.display()))
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(f64::to_string)).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Full log, metrics and per-plot tables. Returns the files written.
pub fn export(log: &SimLog, report: &MetricsReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, SimError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = |name: &str| dir.join(name);

    log.save_csv(path(LOG_FILE))?;
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(path(METRICS_FILE), json + "\n").map_err(|e| io(&path(METRICS_FILE), e))?;

    write_table(
        &path(TRAJECTORY_FILE),
        &["time", "X", "Y", "eeX", "eeY", "eeZ", "tgtX", "tgtY", "tgtZ"],
        log.rows.iter().map(|r| {
            let mut v = vec![r.time, r.x, r.y];
            v.extend(r.ee);
            v.extend(r.target);
            v
        }),
    )?;
    write_table(
        &path(ERRORS_FILE),
        &["time", "e1", "e2", "e3", "errX", "errY", "errZ"],
        log.rows.iter().map(|r| {
            let mut v = vec![r.time];
            v.extend(r.e);
            v.extend((0..3).map(|i| r.ee[i] - r.target[i]));
            v
        }),
    )?;
    write_table(
        &path(TORQUES_FILE),
        &["time", "tau1", "tau2", "tau3", "tau4"],
        log.rows.iter().map(|r| {
            let mut v = vec![r.time];
            v.extend(r.tau);
            v
        }),
    )?;
    write_table(
        &path(WHEELS_FILE),
        &["time", "vL", "vR", "v", "w"],
        log.rows.iter().map(|r| vec![r.time, r.track[0], r.track[1], r.v, r.w]),
    )?;
    Ok([LOG_FILE, METRICS_FILE, TRAJECTORY_FILE, ERRORS_FILE, TORQUES_FILE, WHEELS_FILE]
        .iter()
        .map(|n| path(n))
        .collect())
}
fn pose_json(p: &ChassisState) -> Value {
    json!({ "x": p.x, "y": p.y, "phi_deg": p.phi.to_degrees() })
}

/// Circuit, stops, commands and timing of a plan as JSON. Lengths in m,
/// angles in degrees.
pub fn plan_summary(plan: &MissionPlan) -> Value {
    let points = |pts: Vec<crate::mission::PathPoint>| -> Vec<Value> {
        pts.iter()
            .map(|p| json!({ "label": p.label, "s": p.s, "pose": pose_json(&p.pose) }))
            .collect()
    };
    let stops: Vec<Value> = plan
        .stops
        .stops
        .iter()
        .map(|s| {
            json!({
                "fire": s.fire.id,
                "position": s.fire.position,
                "group": s.group_label(),
                "nearest_a": format!("A{}", s.nearest_a),
                "along": s.along,
                "s": s.s,
                "chassis": pose_json(&s.chassis),
            })
        })
        .collect();
    let commands: Vec<Value> = plan
        .dispatched
        .commands
        .iter()
        .map(|c| match c {
            MissionCommand::Drive {
                stop,
                target,
                distance,
                duration,
            } => json!({
                "kind": "drive",
                "stop": stop,
                "target": pose_json(target),
                "distance": distance,
                "duration": duration,
            }),
            MissionCommand::ReachAndSpray { stop, fire, q, dwell } => json!({
                "kind": "reach_and_spray",
                "stop": stop,
                "fire": fire,
                "q_deg": q.to_degrees(),
                "dwell": dwell,
            }),
        })
        .collect();
    let flagged: Vec<Value> = plan
        .dispatched
        .flagged
        .iter()
        .map(|f| json!({ "fire": f.fire, "stop": pose_json(&f.stop) }))
        .collect();
    json!({
        "circuit": {
            "center": plan.circuit.spec.center,
            "edge_length": plan.circuit.edge_length(),
            "straight": plan.circuit.straight,
            "corner_radius": plan.circuit.spec.corner_radius,
            "half_side": plan.circuit.half_side,
            "speed": plan.circuit.spec.speed,
            "k_points": points(plan.circuit.k_points()),
            "a_points": points(plan.circuit.a_points()),
        },
        "stops": stops,
        "commands": commands,
        "flagged": flagged,
        "top_config_deg": plan.top_config.to_degrees(),
        "stage1_time": plan.stage1_time,
        "top_spray_time": plan.top_spray_time,
        "stage2_time": plan.stage2_time,
        "total_time": plan.total_time(),
        "within_discharge_time": plan.within_discharge_time(),
        "phases": plan
            .phases
            .iter()
            .map(|p| json!({ "state": p.state.to_string(), "t0": p.t0, "t1": p.t1 }))
            .collect::<Vec<_>>(),
    })
}

