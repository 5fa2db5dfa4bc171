//! Closed-loop mission simulation.

use super::{compute_metrics, LogRow, MetricsParams, MetricsReport, ScenarioConfig, SimError, SimLog};
use crate::arm_control::{arm_control_law, arm_plant_step, lyapunov};
use crate::chassis_control::{
    chassis_control_law, chassis_sliding_surface, error_rate, offset_tracking_error, ChassisPlant, ChassisState,
    Disturbance,
};
use crate::kinematics::JointAngles;
use crate::math::sgn;
use crate::mission::MissionPlan;

/// Per-sample quantities that are not logged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// `½sᵀs` of the arm surface.
    pub arm_lyapunov: Vec<f64>,
    /// `½SᵀS` of the chassis surfaces.
    pub chassis_lyapunov: Vec<f64>,
    /// `sgn(e1)` of the chassis error.
    pub e1_sign: Vec<f64>,
    /// Sign of `ė2 + k2e2`.
    pub sigma_sign: Vec<f64>,
    pub disturbance: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub plan: MissionPlan,
    pub log: SimLog,
    pub report: MetricsReport,
    pub diagnostics: Diagnostics,
}

impl ScenarioConfig {
    pub fn metrics_params(&self) -> MetricsParams {
        MetricsParams {
            band: self.metrics.band,
            discharge_time: self.fire_test.discharge_time,
        }
    }
}

/// Runs the whole mission with the controls held over each step.
pub fn run_mission(config: &ScenarioConfig) -> Result<SimOutput, SimError> {
    config.validate()?;
    let plan = config.plan()?;
    let dt = config.dt;
    let reference = plan.sample_references(dt).map_err(SimError::Mission)?;
    let spec = &plan.spec;
    let dynamics = config.dynamics();
    let arm_gains = config.arm_gains();
    let gains = config.chassis_gains();
    let mut disturbance = Disturbance::new(config.disturbance(), config.seed);
    let track_width = config.chassis.track_width;

    let start = &reference.samples[0];
    let (s0, c0) = start.chassis.pose.phi.sin_cos();
    let [dx, dy] = config.chassis.initial_offset;
    let mut chassis = ChassisPlant {
        pose: ChassisState::new(
            start.chassis.pose.x + c0 * dx - s0 * dy,
            start.chassis.pose.y + s0 * dx + c0 * dy,
            crate::math::wrap_angle(start.chassis.pose.phi + config.chassis.initial_heading.to_radians()),
        ),
        deviation: [0.0, 0.0],
    };
    let mut q = start.arm.q;
    let mut qd = start.arm.qd;

    let n = reference.samples.len();
    let mut rows = Vec::with_capacity(n);
    let mut diag = Diagnostics::default();
    for (k, r) in reference.samples.iter().enumerate() {
        let t = r.t;
        let vel = chassis.velocity(&r.chassis.vel);
        let e = offset_tracking_error(&r.chassis.pose, &chassis.pose, gains.offset);
        let ed = error_rate(&e, &r.chassis, &vel, gains.offset);
        let u = chassis_control_law(&e, &ed, &r.chassis, &vel, &gains);
        let surface = chassis_sliding_surface(&e, &ed, &gains);
        let f = disturbance.sample(t);

        let command = arm_control_law(&dynamics, &q, &qd, &r.arm, &arm_gains);
        let ee = spec
            .mount
            .tool_position(&spec.arm, spec.tool, &chassis.pose, &JointAngles::from_vector(&q));
        let (vl, vr) = vel.track_speeds(track_width);

        rows.push(LogRow {
            time: t,
            state: r.state.clone(),
            x: chassis.pose.x,
            y: chassis.pose.y,
            phi: chassis.pose.phi.to_degrees(),
            v: vel.v,
            w: vel.w.to_degrees(),
            e: [e.e1, e.e2, e.e3.to_degrees()],
            s: surface,
            u,
            track: [vl, vr],
            q: [0, 1, 2, 3].map(|i| q[i].to_degrees()),
            qd: [0, 1, 2, 3].map(|i| qd[i].to_degrees()),
            tau: [0, 1, 2, 3].map(|i| command.torque[i]),
            ee,
            target: r.target,
            event: r.event.clone(),
        });
        diag.arm_lyapunov.push(lyapunov(&command.surface));
        diag.chassis_lyapunov.push(0.5 * (surface[0] * surface[0] + surface[1] * surface[1]));
        diag.e1_sign.push(sgn(e.e1));
        diag.sigma_sign.push(sgn(ed.e2 + gains.k2 * e.e2));
        diag.disturbance.push(f);

        if k + 1 < n {
            chassis
                .step(&plan.trajectory, config.integrator, t, dt, u, f, gains.f_max)
                .map_err(|source| SimError::Chassis { t, source })?;
            (q, qd) = arm_plant_step(&dynamics, config.integrator, &q, &qd, &command.torque, dt)
                .map_err(|source| SimError::Dynamics { t, source })?;
        }
    }

    let log = SimLog { dt, rows };
    let report = compute_metrics(&log, &config.metrics_params())?;
    Ok(SimOutput {
        plan,
        log,
        report,
        diagnostics: diag,
    })
}
