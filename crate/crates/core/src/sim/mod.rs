//! Deterministic discrete-event simulation of one streaming session.
//!
//! Tiles are fetched back to back in (segment, tile) order over a
//! piecewise-constant capacity trace. The decision for segment `i` is taken
//! the instant segment `i - 1` finishes downloading. Playback starts at
//! `initial_buffer` seconds of wall time (pre-buffered content) and stalls
//! whenever the next segment has not arrived.

mod aux;
mod download;
mod playback;
mod session;

pub use aux::{auxiliary_sets, AuxSets};
pub use download::{integrate_capacity, step_download, DownloadState, SegmentDownload, TileDownload};
pub use playback::{playback_update, Playback};
pub use session::{
    run_session, DecisionInput, Policy, Reveal, Revealed, SessionInputs, SessionLog, SimConfig,
};
