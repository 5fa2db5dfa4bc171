//! Mission planning: the chassis circuit, per-edge end-effector sweeps,
//! residual-flame servicing and the mission state machine.

mod circuit;
mod fires;
mod plan;
mod state;
mod sweep;

pub use circuit::{
    build_circuit, Circuit, CircuitSpec, PathPoint, ProfilePiece, SpeedProfile, TimedTrajectory,
};
pub use fires::{
    assign_fires, dispatch, nearest_a_point, DispatchSpec, Dispatched, FireSpot, FlaggedFire,
    MissionCommand, ReachModel, Stop, StopPlan,
};
pub use plan::{
    blend, default_fires, hermite, FireTestSpec, MissionPlan, MissionSpec, Phase, ReferenceSample, SampledMission,
    TopSprayConfig,
};
pub use state::{mission_step, MissionEvent, MissionState, StopPhase, SweepPhase};
pub use sweep::{build_sweep, Sweep, SweepSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("invalid circuit geometry: {0}")]
    GeometryError(String),
    #[error("sweep on edge {edge} is infeasible: {reason}")]
    InfeasibleSweep { edge: usize, reason: String },
    #[error("flame {fire} cannot be reached from its stop")]
    UnreachableFlame { fire: String },
    #[error("illegal transition from {from} on {event}")]
    IllegalTransition { from: String, event: String },
    #[error("invalid mission setup: {0}")]
    InvalidSpec(String),
}
