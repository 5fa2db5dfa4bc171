//! Report figures computed from a log alone.

use super::{SimError, SimLog};
use serde::{Deserialize, Serialize};

/// Inputs to the report that are not part of the log.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsParams {
    /// Chassis error band `[|e1| mm, |e2| mm, |e3| deg]`.
    pub band: [f64; 3],
    /// s.
    pub discharge_time: f64,
}

impl Default for MetricsParams {
    fn default() -> Self {
        Self {
            band: [20.0, 1.0, 0.6],
            discharge_time: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Mean |tool − target| per axis over sweep samples, mm.
    pub ee_error_avg: [f64; 3],
    pub ee_error_max: [f64; 3],
    pub sweep_samples: usize,
    /// Largest |e1|, |e2| (mm) and |e3| (deg) over the run.
    pub chassis_error_max: [f64; 3],
    /// First time after which the chassis errors stay inside the band, s.
    pub convergence_time: Option<f64>,
    /// Largest chassis speed, m/s.
    pub peak_speed: f64,
    /// Mean |Δτ| per joint between consecutive samples, N·m.
    pub torque_chatter: [f64; 4],
    /// Times between consecutive K points, s.
    pub edge_times: Vec<f64>,
    pub stage1_time: f64,
    pub top_spray_time: f64,
    pub stage2_time: f64,
    pub total_time: f64,
    pub fires_serviced: usize,
    pub discharge_time: f64,
    pub within_discharge_time: bool,
}

impl MetricsReport {
    pub fn verdict(&self) -> &'static str {
        if self.within_discharge_time {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

fn max_abs(acc: &mut [f64], values: impl Iterator<Item = f64>) {
    for (a, v) in acc.iter_mut().zip(values) {
        *a = a.max(v.abs());
    }
}

pub fn compute_metrics(log: &SimLog, params: &MetricsParams) -> Result<MetricsReport, SimError> {
    let rows = &log.rows;
    let Some(first) = rows.first() else {
        return Err(SimError::EmptyLog);
    };
    let last = rows.last().expect("non-empty");

    let mut sum = [0.0; 3];
    let mut ee_max = [0.0; 3];
    let mut n_sweep = 0;
    for r in rows.iter().filter(|r| r.in_sweep()) {
        for i in 0..3 {
            let d = (r.ee[i] - r.target[i]).abs();
            sum[i] += d;
            ee_max[i] = f64::max(ee_max[i], d);
        }
        n_sweep += 1;
    }
    let ee_avg = if n_sweep > 0 {
        sum.map(|s| s / n_sweep as f64)
    } else {
        [0.0; 3]
    };

    let mm = |r: &super::LogRow| [r.e[0] * 1000.0, r.e[1] * 1000.0, r.e[2]];
    let mut chassis_max = [0.0; 3];
    for r in rows {
        max_abs(&mut chassis_max, mm(r).into_iter());
    }
    let inside = |r: &super::LogRow| {
        let e = mm(r);
        (0..3).all(|i| e[i].abs() <= params.band[i])
    };
    let convergence_time = match rows.iter().rposition(|r| !inside(r)) {
        None => Some(first.time),
        Some(i) => rows.get(i + 1).map(|r| r.time),
    };

    let peak_speed = rows.iter().map(|r| r.v.abs()).fold(0.0, f64::max);

    let mut chatter = [0.0; 4];
    for w in rows.windows(2) {
        for j in 0..4 {
            chatter[j] += (w[1].tau[j] - w[0].tau[j]).abs();
        }
    }
    if rows.len() > 1 {
        let n = (rows.len() - 1) as f64;
        chatter = chatter.map(|c| c / n);
    }

    let k_times: Vec<f64> = (1..=5).filter_map(|i| log.event_time(&format!("K{i}"))).collect();
    let edge_times: Vec<f64> = k_times.windows(2).map(|w| w[1] - w[0]).collect();
    let stage1_time: f64 = edge_times.iter().sum();
    let stage2_time = match (log.event_time("stage2_start"), log.event_time("stage2_end")) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let end = log.event_time("end").unwrap_or(last.time);
    let total_time = end - log.event_time("K1").unwrap_or(first.time);
    let top_spray_time = total_time - stage1_time - stage2_time;
    let fires_serviced = rows
        .iter()
        .flat_map(|r| r.events())
        .filter(|e| e.starts_with("spray_end_"))
        .count();

    Ok(MetricsReport {
        ee_error_avg: ee_avg,
        ee_error_max: ee_max,
        sweep_samples: n_sweep,
        chassis_error_max: chassis_max,
        convergence_time,
        peak_speed,
        torque_chatter: chatter,
        edge_times,
        stage1_time,
        top_spray_time,
        stage2_time,
        total_time,
        fires_serviced,
        discharge_time: params.discharge_time,
        within_discharge_time: total_time < params.discharge_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::LogRow;

    fn synthetic() -> SimLog {
        let rows = (0..=10)
            .map(|k| {
                let t = k as f64 * 0.1;
                let sweeping = (2..8).contains(&k);
                LogRow {
                    time: t,
                    state: if sweeping { "StageI.1.sweep" } else { "StageI.1.transfer" }.into(),
                    ee: [if sweeping { 2.0 } else { 50.0 }, 0.0, 0.0],
                    e: [if k < 3 { 0.05 } else { 0.0 }, 0.0, 0.0],
                    event: match k {
                        0 => "K1".into(),
                        10 => "K2;end".into(),
                        _ => String::new(),
                    },
                    ..LogRow::default()
                }
            })
            .collect();
        SimLog { dt: 0.1, rows }
    }

    #[test]
    fn constant_sweep_error_averages_exactly() {
        let m = compute_metrics(&synthetic(), &MetricsParams::default()).unwrap();
        assert_eq!(m.ee_error_avg, [2.0, 0.0, 0.0]);
        assert_eq!(m.sweep_samples, 6);
        assert_eq!(m.ee_error_max[0], 2.0);
    }

    #[test]
    fn convergence_is_first_entry_never_left() {
        let m = compute_metrics(&synthetic(), &MetricsParams::default()).unwrap();
        assert_eq!(m.convergence_time, Some(0.30000000000000004));
        assert_eq!(m.chassis_error_max[0], 50.0);
    }

    #[test]
    fn edge_times_add_up() {
        let m = compute_metrics(&synthetic(), &MetricsParams::default()).unwrap();
        assert_eq!(m.edge_times, vec![1.0]);
        assert_eq!(m.stage1_time, m.edge_times.iter().sum::<f64>());
        assert_eq!(m.total_time, 1.0);
        assert!(m.within_discharge_time);
    }

    #[test]
    fn empty_log_is_an_error() {
        assert!(matches!(
            compute_metrics(&SimLog::default(), &MetricsParams::default()),
            Err(SimError::EmptyLog)
        ));
    }
}
