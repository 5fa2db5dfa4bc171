//! Mobile-manipulator simulation for automated fire-extinguisher testing.
//!
//! A palletizing arm on a tracked chassis circles a wood-crib fire, sweeping
//! each face while the chassis follows a rounded-square circuit, then
//! returns to residual flames. The crate models the arm kinematics and
//! dynamics, the two sliding-mode trackers, the mission planner and a
//! fixed-step simulator with CSV logging and metrics.

pub mod kinematics;
pub mod math;
pub mod dynamics;
pub mod integrator;
pub mod arm_control;
pub mod chassis_control;
pub mod mission;
pub mod sim;
