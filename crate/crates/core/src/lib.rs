//! Core of the navvi warehouse teleoperation simulator.
//!
//! A human (or the built-in autopilot) drives a differential-drive robot
//! through a scripted warehouse. Each fixed-rate tick moves the scripted
//! agents, keeps the navigation mesh and the planned route current, and
//! derives stereo haptic intensities, spoken cues and the on-screen path
//! line. Interaction events are logged to CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod events;
pub mod feedback;
pub mod geom;
pub mod navmesh;
pub mod planner;
pub mod sim;
pub mod world;
