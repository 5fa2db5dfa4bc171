//! Acceptance checks for the default build. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use fxsim::arm_control::arm_plant_step;
use fxsim::chassis_control::{
    error_rate, track_trajectory, ChassisGains, ChassisPlant, ChassisState, ChassisTrajectory, Disturbance,
    DisturbanceSpec, StraightLine,
};
use fxsim::integrator::Integrator;
use fxsim::kinematics::{JointAngles, JointVector, LimitCheck};
use fxsim::mission::{assign_fires, Circuit, CircuitSpec, FireSpot};
use fxsim::sim::{compute_metrics, export, run_mission, ScenarioConfig, SimLog, LOG_FILE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::time::Instant;

const WORKSPACE_TOL_MM: f64 = 1.0;
const IK_SAMPLES: usize = 10_000;
const IK_TOL_RAD: f64 = 1e-9;
const DYNAMICS_SAMPLES: usize = 1_000;
const SKEW_TOL: f64 = 1e-8;
const GRAVITY_REL_TOL: f64 = 1e-6;
const ENERGY_DRIFT_TOL: f64 = 1e-6;
const EE_AVG_LIMIT_MM: f64 = 5.0;
/// Absolute floor on the per-step growth of ½sᵀs of the arm.
const ARM_V_FLOOR: f64 = 1e-9;
const CHASSIS_BAND: [f64; 3] = [0.020, 0.001, 0.6];
const CHASSIS_SETTLE_S: f64 = 1.0;
const TIME_TOL_S: f64 = 1e-9;
const FIRE_SETS: u64 = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn workspace_radii() -> Outcome {
    let arm = ScenarioConfig::default().manipulator();
    let w = arm.workspace_analysis(0.5f64.to_radians());
    let pass = (w.r_min - 972.0).abs() <= WORKSPACE_TOL_MM && (w.r_max - 2678.0).abs() <= WORKSPACE_TOL_MM;
    outcome(pass, format!("r_min {:.3} mm, r_max {:.3} mm", w.r_min, w.r_max))
}

fn random_in_limits(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> JointAngles {
    let limits = cfg.manipulator().limits;
    loop {
        let q = JointAngles::from_vector(&JointVector::from_fn(|i, _| {
            rng.random_range(limits.min[i]..=limits.max[i])
        }));
        if limits.contains(&q) {
            return q;
        }
    }
}

fn ik_round_trip() -> Outcome {
    let cfg = ScenarioConfig::default();
    let arm = cfg.manipulator();
    let tool = cfg.tool();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..IK_SAMPLES {
        let q = random_in_limits(&mut rng, &cfg);
        let pose = arm.forward_kinematics(&q, tool, LimitCheck::Enforce).expect("in limits");
        match arm.inverse_kinematics(&pose, tool) {
            Ok(back) => worst = worst.max((back.as_vector() - q.as_vector()).amax()),
            Err(_) => failures += 1,
        }
    }
    outcome(
        worst < IK_TOL_RAD && failures == 0,
        format!("{IK_SAMPLES} configs, max joint error {worst:.2e} rad, {failures} failures"),
    )
}

fn dynamics_identities() -> Outcome {
    let cfg = ScenarioConfig::default();
    let dynamics = cfg.dynamics();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut asymmetric = 0;
    let mut cholesky_failures = 0;
    let mut skew: f64 = 0.0;
    let mut gravity: f64 = 0.0;
    for _ in 0..DYNAMICS_SAMPLES {
        let q = random_in_limits(&mut rng, &cfg).as_vector();
        let qd = JointVector::from_fn(|_, _| rng.random_range(-2.0..=2.0));
        let x = JointVector::from_fn(|_, _| rng.random_range(-1.0..=1.0));
        let m = dynamics.mass_matrix(&q);
        if m != m.transpose() {
            asymmetric += 1;
        }
        if m.cholesky().is_none() {
            cholesky_failures += 1;
        }
        let partials = dynamics.mass_matrix_partials(&q);
        let m_dot = (0..4).fold(m * 0.0, |acc, i| acc + partials[i] * qd[i]);
        let c = dynamics.coriolis_matrix(&q, &qd);
        skew = skew.max((x.transpose() * (m_dot - 2.0 * c) * x)[0].abs());

        let h = 1e-6;
        let fd = JointVector::from_fn(|i, _| {
            let mut p = q;
            let mut n = q;
            p[i] += h;
            n[i] -= h;
            (dynamics.potential_energy(&p) - dynamics.potential_energy(&n)) / (2.0 * h)
        });
        let g = dynamics.gravity_vector(&q);
        gravity = gravity.max((g - fd).norm() / g.norm());
    }

    let mut free = cfg.clone();
    free.inertia.gravity = 0.0;
    free.inertia.damping = [0.0; 4];
    let free = free.dynamics();
    let mut q = random_in_limits(&mut rng, &cfg).as_vector();
    let mut qd = JointVector::new(0.8, -0.6, 0.5, 1.0);
    let e0 = free.kinetic_energy(&q, &qd);
    let dt = 1e-4;
    for _ in 0..10_000 {
        (q, qd) = arm_plant_step(&free, Integrator::Rk4, &q, &qd, &JointVector::zeros(), dt).expect("plant step");
    }
    let drift = (free.kinetic_energy(&q, &qd) - e0).abs() / e0;

    let pass = asymmetric == 0
        && cholesky_failures == 0
        && skew < SKEW_TOL
        && gravity < GRAVITY_REL_TOL
        && drift < ENERGY_DRIFT_TOL;
    outcome(
        pass,
        format!(
            "asymmetric {asymmetric}, cholesky failures {cholesky_failures}, max |x'(Mdot-2C)x| {skew:.2e}, \
             gravity rel error {gravity:.2e}, energy drift {drift:.2e}"
        ),
    )
}

/// ½sᵀs may grow over a step only by what the held torque cannot follow:
/// with `m = dt(|Δq̈_ref| + |Δq̈| + λ|Δė|)` the surface moves by at most `m`
/// beyond its commanded change, so `ΔV ≤ |s|m + m²/2` (plus a round-off
/// floor).
fn arm_controller() -> Outcome {
    let cfg = ScenarioConfig::default();
    let run = run_mission(&cfg).expect("default mission runs");
    let reference = run.plan.sample_references(cfg.dt).expect("references");
    let v = &run.diagnostics.arm_lyapunov;
    let dt = cfg.dt;
    let lambda = cfg.arm_gains().lambda;
    let qd: Vec<JointVector> = run
        .log
        .rows
        .iter()
        .map(|r| JointVector::from_iterator(r.qd.iter().map(|x| x.to_radians())))
        .collect();
    let n = qd.len();
    let qdd = |k: usize| -> JointVector {
        if k == 0 {
            (qd[1] - qd[0]) / dt
        } else if k + 1 == n {
            (qd[n - 1] - qd[n - 2]) / dt
        } else {
            (qd[k + 1] - qd[k - 1]) / (2.0 * dt)
        }
    };
    let edot = |k: usize| reference.samples[k].arm.qd - qd[k];

    let mut violations = 0;
    let mut increases = 0;
    let mut worst_ratio: f64 = 0.0;
    for k in 0..n - 1 {
        let m = dt
            * ((reference.samples[k + 1].arm.qdd - reference.samples[k].arm.qdd).norm()
                + (qdd(k + 1) - qdd(k)).norm()
                + lambda * (edot(k + 1) - edot(k)).norm());
        let slack = (2.0 * v[k]).sqrt() * m + 0.5 * m * m + ARM_V_FLOOR;
        let dv = v[k + 1] - v[k];
        if dv > 0.0 {
            increases += 1;
            worst_ratio = worst_ratio.max(dv / slack);
        }
        if dv > slack {
            violations += 1;
        }
    }
    let avg = run.report.ee_error_avg;
    let pass = violations == 0 && avg.iter().all(|&e| e <= EE_AVG_LIMIT_MM);
    outcome(
        pass,
        format!(
            "ee avg [{:.3}, {:.3}, {:.3}] mm over {} sweep samples, V rises {increases} times within slack \
             (worst {:.2} of slack), {violations} beyond",
            avg[0], avg[1], avg[2], run.report.sweep_samples, worst_ratio
        ),
    )
}

/// Offsets and disturbances for the straight-line test; every disturbance
/// stays inside `f_max`.
fn chassis_controller() -> Outcome {
    let gains = ChassisGains::default();
    let dt = 0.001;
    let f = gains.f_max;
    let disturbances = [
        ("none", DisturbanceSpec::None),
        ("constant", DisturbanceSpec::Constant([f[0], -f[1]])),
        (
            "sine",
            DisturbanceSpec::Sine {
                amplitude: f,
                frequency: [2.0, 3.0],
                phase: [0.0, 1.0],
            },
        ),
        ("noise", DisturbanceSpec::Noise { amplitude: f }),
    ];
    let offsets: [(f64, f64); 4] = [(0.1, 5.0), (0.1, -5.0), (-0.1, 5.0), (-0.1, -5.0)];
    // Under the sign law the surfaces chatter in a band of one step of the
    // switching and disturbance terms either side of zero.
    let band_v: f64 = (0..2).map(|i| 0.5 * (2.0 * dt * (gains.p[i] + f[i])).powi(2)).sum();

    let line = StraightLine {
        start: ChassisState::new(0.0, 0.0, 0.0),
        speed: 0.88,
    };
    let mut worst_settle: f64 = 0.0;
    let mut unsettled = 0;
    let mut violations = 0;
    let mut switch_steps = 0;
    for (d_index, (_, spec)) in disturbances.iter().enumerate() {
        for &(lateral, heading) in &offsets {
            let mut disturbance = Disturbance::new(spec.clone(), 100 + d_index as u64);
            let initial = ChassisPlant {
                pose: ChassisState::new(0.0, lateral, heading.to_radians()),
                deviation: [0.0; 2],
            };
            let trace = track_trajectory(&line, &gains, Integrator::Rk4, &mut disturbance, initial, dt, 3000)
                .expect("disturbance within bounds");
            let inside = |k: usize| {
                let e = trace[k].error;
                e.e1.abs() <= CHASSIS_BAND[0]
                    && e.e2.abs() <= CHASSIS_BAND[1]
                    && e.e3.abs().to_degrees() <= CHASSIS_BAND[2]
            };
            match (0..trace.len()).rposition(|k| !inside(k)) {
                Some(k) if k + 1 == trace.len() => unsettled += 1,
                Some(k) => worst_settle = worst_settle.max(trace[k + 1].t),
                None => {}
            }
            let signs: Vec<(f64, f64)> = trace
                .iter()
                .map(|t| {
                    let ed = error_rate(&t.error, &line.sample(t.t), &t.vel, gains.offset);
                    (t.error.e1.signum(), (ed.e2 + gains.k2 * t.error.e2).signum())
                })
                .collect();
            let v: Vec<f64> = trace
                .iter()
                .map(|t| 0.5 * (t.surface[0].powi(2) + t.surface[1].powi(2)))
                .collect();
            for k in 0..v.len() - 1 {
                if signs[k] != signs[k + 1] {
                    switch_steps += 1;
                } else if v[k + 1] > v[k] && v[k + 1] > band_v {
                    violations += 1;
                }
            }
        }
    }
    let pass = unsettled == 0 && worst_settle <= CHASSIS_SETTLE_S && violations == 0;
    outcome(
        pass,
        format!(
            "{} runs, slowest entry into band {worst_settle:.3} s, {unsettled} never settled, \
             {violations} V rises outside the sliding band ({switch_steps} surface-switch steps skipped)",
            disturbances.len() * offsets.len()
        ),
    )
}

fn mission_timing() -> Outcome {
    let cfg = ScenarioConfig::default();
    let plan = cfg.plan().expect("default plan");
    let run = run_mission(&cfg).expect("default mission runs");
    let r = &run.report;
    let pass = (plan.stage1_time - 11.824).abs() < TIME_TOL_S
        && (plan.total_time() - 14.824).abs() < TIME_TOL_S
        && (r.stage1_time - 11.824).abs() < TIME_TOL_S
        && (r.total_time - 14.824).abs() < TIME_TOL_S
        && r.edge_times.len() == 4
        && r.edge_times.iter().all(|t| (t - 2.956).abs() < TIME_TOL_S)
        && r.verdict() == "PASS";
    outcome(
        pass,
        format!(
            "stage I {:.6} s, stage II {:.6} s, total {:.6} s, {} against {} s",
            r.stage1_time,
            r.stage2_time,
            r.total_time,
            r.verdict(),
            r.discharge_time
        ),
    )
}

/// Circuit geometry rebuilt from its definition: four straights joined by
/// quarter arcs, K1 at the middle of the bottom straight, anti-clockwise.
struct OracleCircuit {
    half_straight: f64,
    half_side: f64,
    edge: f64,
}

impl OracleCircuit {
    fn new(spec: &CircuitSpec) -> Self {
        let straight = spec.edge_length - std::f64::consts::FRAC_PI_2 * spec.corner_radius;
        Self {
            half_straight: 0.5 * straight,
            half_side: 0.5 * straight + spec.corner_radius,
            edge: spec.edge_length,
        }
    }

    /// Midpoint and travel direction of straight `k` (1..=4).
    fn straight(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        let h = self.half_side;
        match k {
            1 => ([0.0, -h], [1.0, 0.0]),
            2 => ([h, 0.0], [0.0, 1.0]),
            3 => ([0.0, h], [-1.0, 0.0]),
            _ => ([-h, 0.0], [0.0, -1.0]),
        }
    }

    fn a_points(&self) -> Vec<[f64; 2]> {
        (1..=4)
            .flat_map(|k| {
                let (m, d) = self.straight(k);
                let l = self.half_straight;
                [[m[0] - l * d[0], m[1] - l * d[1]], [m[0] + l * d[0], m[1] + l * d[1]]]
            })
            .collect()
    }

    fn nearest(&self, p: [f64; 2]) -> usize {
        let dist = |a: &[f64; 2]| (a[0] - p[0]).hypot(a[1] - p[1]);
        let a = self.a_points();
        let best = a.iter().map(dist).fold(f64::INFINITY, f64::min);
        1 + a.iter().position(|x| dist(x) == best).expect("eight points")
    }

    fn path_parameter(&self, group: usize, p: [f64; 2]) -> f64 {
        let (m, d) = self.straight(group);
        let along = ((p[0] - m[0]) * d[0] + (p[1] - m[1]) * d[1]).clamp(-self.half_straight, self.half_straight);
        (((group - 1) as f64) * self.edge + along).rem_euclid(4.0 * self.edge)
    }
}

fn algorithm_oracle() -> Outcome {
    let spec = ScenarioConfig::default().mission_spec().circuit;
    let circuit = Circuit::new(spec.clone()).expect("default circuit");
    let oracle = OracleCircuit::new(&spec);
    let mut mismatches = 0;
    let mut order_errors = 0;
    let mut fires_total = 0;
    for seed in 0..FIRE_SETS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(1..=10);
        fires_total += n;
        let fires: Vec<FireSpot> = (0..n)
            .map(|i| {
                FireSpot::new(
                    format!("F{}", i + 1),
                    [rng.random_range(-2.2..=2.2), rng.random_range(-2.2..=2.2), rng.random_range(0.1..=0.8)],
                )
            })
            .collect();
        let plan = assign_fires(&fires, &circuit, None);
        let mut expected: Vec<(f64, String, usize)> = fires
            .iter()
            .map(|f| {
                let p = [f.position[0], f.position[1]];
                let a = oracle.nearest(p);
                let group = a.div_ceil(2);
                (oracle.path_parameter(group, p), f.id.clone(), a)
            })
            .collect();
        expected.sort_by(|x, y| x.0.total_cmp(&y.0));
        if plan.stops.len() != expected.len() {
            mismatches += 1;
            continue;
        }
        for (stop, (s, id, a)) in plan.stops.iter().zip(&expected) {
            if stop.fire.id != *id || stop.nearest_a != *a || stop.group != a.div_ceil(2) || (stop.s - s).abs() > 1e-9
            {
                mismatches += 1;
            }
        }
        if plan.stops.windows(2).any(|w| w[1].s < w[0].s) {
            order_errors += 1;
        }
    }

    let a = oracle.a_points();
    let worked = [
        FireSpot::new("F2", [a[3][0] - 0.4, a[3][1] - 0.3, 0.4]),
        FireSpot::new("F1", [a[1][0] - 0.5, a[1][1] + 0.6, 0.4]),
    ];
    let plan = assign_fires(&worked, &circuit, None);
    let labels: Vec<(String, String)> = plan
        .stops
        .iter()
        .map(|s| (s.fire.id.clone(), s.group_label()))
        .collect();
    let worked_ok = labels == [("F1".to_string(), "A1A2".to_string()), ("F2".to_string(), "A3A4".to_string())];

    outcome(
        mismatches == 0 && order_errors == 0 && worked_ok,
        format!(
            "{FIRE_SETS} sets, {fires_total} fires, {mismatches} mismatches, {order_errors} ordering errors, \
             worked case {labels:?}"
        ),
    )
}

fn determinism_and_export() -> Outcome {
    let cfg = ScenarioConfig::default();
    let a = run_mission(&cfg).expect("first run");
    let b = run_mission(&cfg).expect("second run");
    let hash = |log: &SimLog| Sha256::digest(log.to_csv_string().as_bytes());
    let (ha, hb) = (hash(&a.log), hash(&b.log));
    let dir = tempfile::tempdir().expect("temp dir");
    export(&a.log, &a.report, dir.path()).expect("export");
    let back = SimLog::load_csv(dir.path().join(LOG_FILE)).expect("reload");
    let recomputed = compute_metrics(&back, &cfg.metrics_params()).expect("metrics");
    let expected_rows = (a.report.total_time / cfg.dt).round() as usize + 1;
    let pass = ha == hb && recomputed == a.report && back.rows.len() == expected_rows;
    let digest: String = ha.iter().take(8).map(|b| format!("{b:02x}")).collect();
    outcome(
        pass,
        format!(
            "log sha256 {digest}... {} between runs, {} rows, recomputed report {}",
            if ha == hb { "identical" } else { "differs" },
            back.rows.len(),
            if recomputed == a.report { "equal" } else { "differs" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("workspace radii", workspace_radii),
        ("IK/FK round trip", ik_round_trip),
        ("dynamics identities", dynamics_identities),
        ("arm controller", arm_controller),
        ("chassis controller", chassis_controller),
        ("mission timing", mission_timing),
        ("fire grouping oracle", algorithm_oracle),
        ("determinism and export", determinism_and_export),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {} [{:.2} s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
