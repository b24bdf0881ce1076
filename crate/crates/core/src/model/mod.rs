//! Domain types: bitrate ladders, tile grids, viewport and capacity traces.

mod capacity;
mod fov;
mod ladder;
mod tiles;

pub use capacity::{CapacityTrace, Exhaustion};
pub use fov::{overlap_fractions, FovExtent, OverlapMap, Viewport, ViewportTrace};
pub use ladder::{BitrateLadder, DecisionMode};
pub use tiles::{tile_index, TileGrid};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Temporal layout of the video: `segments` pieces of `segment_length`
/// seconds each, with `initial_buffer` seconds pre-buffered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoConfig {
    pub segments: usize,
    pub segment_length: f64,
    pub initial_buffer: f64,
}

impl VideoConfig {
    pub fn new(segments: usize, segment_length: f64, initial_buffer: f64) -> Result<Self> {
        if segments == 0 {
            return Err(Error::invalid("video needs at least one segment"));
        }
        if !(segment_length > 0.0 && segment_length.is_finite()) {
            return Err(Error::invalid(format!(
                "segment length must be positive, got {segment_length}"
            )));
        }
        if !(initial_buffer >= 0.0 && initial_buffer.is_finite()) {
            return Err(Error::invalid(format!(
                "initial buffer must be nonnegative, got {initial_buffer}"
            )));
        }
        Ok(VideoConfig {
            segments,
            segment_length,
            initial_buffer,
        })
    }
}
