//! File formats, chat backends, the batch runner and the `vlnav` command
//! line on top of `vlnav-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod batch;
pub mod episode_file;
pub mod mapfile;

pub use vlnav_core as core;
