//! Trace-driven simulation and online bitrate selection for viewport-adaptive
//! 360-degree video streaming.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: bitrate ladders, tile grids, viewport and capacity traces, and
//!   the conversion from viewports to per-tile overlap fractions.
//! - [`qoe`]: viewing bitrate, utility, rebuffering and degradation losses,
//!   and the relaxed per-segment objective with its supergradient.
//! - [`sim`]: the discrete-event session simulator (back-to-back tile
//!   downloads, buffer and playback timeline, feedback batches).
//! - [`policy`]: the OBS360 online learner plus simple baselines.
//! - [`oracles`]: per-segment optima, tiny-instance offline optimum, dynamic
//!   regret, drift statistics and the regret bound.
//! - [`io`]: trace files, run configuration, synthetic traces and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod model;
pub mod oracles;
pub mod policy;
pub mod qoe;
pub mod sim;

pub use error::{Error, Result};
