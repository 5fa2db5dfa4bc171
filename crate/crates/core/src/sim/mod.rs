//! Scenario loading, the closed-loop mission run, logging and metrics.

mod config;
mod export;
mod log;
mod metrics;
mod runner;

pub use config::{
    load_scenario, parse_scenario, ArmConfig, ArmGainsConfig, ChassisConfig, ChassisGainsConfig, CircuitConfig,
    DisturbanceConfig, DisturbanceKind, FireConfig, FireTestConfig, InertiaConfig, KeyPointConfig, LimitsConfig,
    LinkConfig, MetricsConfig, ScenarioConfig, Stage2Config, SweepConfig, TopSprayConfigFile, WorkspaceConfig,
};
pub use export::{export, plan_summary, ERRORS_FILE, LOG_FILE, METRICS_FILE, TORQUES_FILE, TRAJECTORY_FILE, WHEELS_FILE};
pub use log::{LogRow, SimLog, CSV_HEADER};
pub use metrics::{compute_metrics, MetricsParams, MetricsReport};
pub use runner::{run_mission, Diagnostics, SimOutput};

use crate::chassis_control::ChassisControlError;
use crate::dynamics::DynamicsError;
use crate::mission::MissionError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario key `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("log has no samples")]
    EmptyLog,
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error("arm dynamics failed at t = {t} s: {source}")]
    Dynamics { t: f64, source: DynamicsError },
    #[error("chassis step failed at t = {t} s: {source}")]
    Chassis { t: f64, source: ChassisControlError },
}
