//! File formats, threaded search, experiment sweeps and the command line
//! for [`hyperdisc_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod hdg;
pub mod oracles;
pub mod parallel;
pub mod sweep;
pub mod verify;

pub use hyperdisc_core as core;
