//! Mission state machine.

use super::MissionError;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepPhase {
    /// The end effector follows the raster.
    Sweep,
    /// The raster is done; the arm moves on toward the next edge's start.
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopPhase {
    Drive,
    Spray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionState {
    Home,
    /// Edge index 1..=4.
    StageI { edge: usize, phase: SweepPhase },
    TopSpray,
    /// Stop index from 0.
    StageII { stop: usize, phase: StopPhase },
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionEvent {
    Start,
    SweepDone,
    EdgeDone,
    TopSprayDone,
    ArrivedAtStop,
    SprayDone,
}

impl fmt::Display for MissionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MissionState::Home => write!(f, "Home"),
            MissionState::StageI { edge, phase } => {
                let p = match phase {
                    SweepPhase::Sweep => "sweep",
                    SweepPhase::Transfer => "transfer",
                };
                write!(f, "StageI.{edge}.{p}")
            }
            MissionState::TopSpray => write!(f, "TopSpray"),
            MissionState::StageII { stop, phase } => {
                let p = match phase {
                    StopPhase::Drive => "drive",
                    StopPhase::Spray => "spray",
                };
                write!(f, "StageII.{}.{p}", stop + 1)
            }
            MissionState::End => write!(f, "End"),
        }
    }
}

impl fmt::Display for MissionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Next state after `event`. `stops` is the number of serviced flames.
pub fn mission_step(state: MissionState, event: MissionEvent, stops: usize) -> Result<MissionState, MissionError> {
    use MissionEvent as E;
    use MissionState as S;
    let next = match (state, event) {
        (S::Home, E::Start) => Some(S::StageI {
            edge: 1,
            phase: SweepPhase::Sweep,
        }),
        (
            S::StageI {
                edge,
                phase: SweepPhase::Sweep,
            },
            E::SweepDone,
        ) => Some(S::StageI {
            edge,
            phase: SweepPhase::Transfer,
        }),
        (
            S::StageI {
                edge,
                phase: SweepPhase::Transfer,
            },
            E::EdgeDone,
        ) => Some(if edge >= 4 {
            S::TopSpray
        } else {
            S::StageI {
                edge: edge + 1,
                phase: SweepPhase::Sweep,
            }
        }),
        (S::TopSpray, E::TopSprayDone) => Some(if stops == 0 {
            S::End
        } else {
            S::StageII {
                stop: 0,
                phase: StopPhase::Drive,
            }
        }),
        (
            S::StageII {
                stop,
                phase: StopPhase::Drive,
            },
            E::ArrivedAtStop,
        ) => Some(S::StageII {
            stop,
            phase: StopPhase::Spray,
        }),
        (
            S::StageII {
                stop,
                phase: StopPhase::Spray,
            },
            E::SprayDone,
        ) => Some(if stop + 1 >= stops {
            S::End
        } else {
            S::StageII {
                stop: stop + 1,
                phase: StopPhase::Drive,
            }
        }),
        _ => None,
    };
    next.ok_or_else(|| MissionError::IllegalTransition {
        from: state.to_string(),
        event: event.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_enters_first_edge() {
        let s = mission_step(MissionState::Home, MissionEvent::Start, 0).unwrap();
        assert_eq!(
            s,
            MissionState::StageI {
                edge: 1,
                phase: SweepPhase::Sweep
            }
        );
    }

    #[test]
    fn fourth_edge_leads_to_top_spray() {
        let s = MissionState::StageI {
            edge: 4,
            phase: SweepPhase::Transfer,
        };
        assert_eq!(mission_step(s, MissionEvent::EdgeDone, 2).unwrap(), MissionState::TopSpray);
    }

    #[test]
    fn no_fires_skips_stage_two() {
        assert_eq!(
            mission_step(MissionState::TopSpray, MissionEvent::TopSprayDone, 0).unwrap(),
            MissionState::End
        );
    }

    #[test]
    fn full_sequence_with_two_stops() {
        use MissionEvent::*;
        let mut events = vec![Start];
        for _ in 0..4 {
            events.extend([SweepDone, EdgeDone]);
        }
        events.push(TopSprayDone);
        events.extend([ArrivedAtStop, SprayDone, ArrivedAtStop, SprayDone]);
        let mut s = MissionState::Home;
        let mut labels = Vec::new();
        for e in events {
            s = mission_step(s, e, 2).unwrap();
            labels.push(s.to_string());
        }
        assert_eq!(labels[0], "StageI.1.sweep");
        assert_eq!(labels[7], "StageI.4.transfer");
        assert_eq!(labels[8], "TopSpray");
        assert_eq!(labels[9], "StageII.1.drive");
        assert_eq!(labels[12], "StageII.2.spray");
        assert_eq!(s, MissionState::End);
    }

    #[test]
    fn out_of_order_event_is_rejected() {
        let err = mission_step(MissionState::Home, MissionEvent::SprayDone, 1).unwrap_err();
        assert_eq!(
            err,
            MissionError::IllegalTransition {
                from: "Home".into(),
                event: "SprayDone".into()
            }
        );
        assert!(mission_step(MissionState::End, MissionEvent::Start, 0).is_err());
    }
}
