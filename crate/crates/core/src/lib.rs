//! Core algorithms for evaluating language-guided navigation agents in a
//! continuous 2D world.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. Everything
//! that touches files, the network or threads lives in the `vlnav` crate.
//!
//! Pipeline per step: [`waypoint`] proposes candidate moves from a
//! traversability heatmap, [`perception`] turns each candidate into a scene
//! description, and [`navigator`] runs the three-stage chain of thought
//! (instruction comprehension, progress estimation, decision) against a
//! [`llm::ChatBackend`]. [`metrics`] scores the resulting trajectory.

#![no_std]
// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod demo;
pub mod episodes;
pub mod geom;
pub mod llm;
pub mod metrics;
pub mod navigator;
pub mod oracle;
pub mod perception;
pub mod runner;
pub mod visibility;
pub mod waypoint;
pub mod world;

pub use geom::Point;
pub use visibility::VisibilityGraph;
pub use waypoint::Waypoint;
pub use world::{Pose2D, WorldMap};

/// Default agent disc radius in meters.
pub const AGENT_RADIUS: f64 = 0.18;
/// Default sensing range in meters; rays are capped here.
pub const MAX_RANGE: f64 = 10.0;
/// Default success radius in meters for simulated episodes.
pub const SUCCESS_RADIUS: f64 = 3.0;
/// Success radius used for real-world style evaluation.
pub const REAL_WORLD_SUCCESS_RADIUS: f64 = 2.0;
