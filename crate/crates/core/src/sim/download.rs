use serde::{Deserialize, Serialize};

use crate::model::{CapacityTrace, Exhaustion};
use crate::Result;

/// Finish time of a `bits`-megabit download started at `t0` on a fully
/// utilized link.
pub fn integrate_capacity(
    trace: &CapacityTrace,
    t0: f64,
    bits: f64,
    exhaustion: Exhaustion,
) -> Result<f64> {
    trace.integrate(t0, bits, exhaustion)
}

/// Wall clock and buffer right after the previous segment finished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownloadState {
    /// Finish time of the previous segment's last tile.
    pub clock: f64,
    /// Buffer occupancy at that instant, seconds of playback.
    pub buffer: f64,
}

impl DownloadState {
    pub fn initial(initial_buffer: f64) -> Self {
        DownloadState {
            clock: 0.0,
            buffer: initial_buffer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileDownload {
    pub start: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDownload {
    pub tiles: Vec<TileDownload>,
    /// Start of the first tile (the decision instant).
    pub start: f64,
    /// Finish of the last tile.
    pub finish: f64,
    pub duration: f64,
    /// Delivered megabits over the download duration.
    pub dbar: f64,
    pub buffer_before: f64,
    pub buffer_after: f64,
}

/// Downloads one segment's tiles in order and applies the buffer update
/// `b_i = [b_{i-1} - duration]^+ + beta`.
pub fn step_download(
    bitrates: &[f64],
    beta: f64,
    trace: &CapacityTrace,
    exhaustion: Exhaustion,
    state: &mut DownloadState,
) -> Result<SegmentDownload> {
    let start = state.clock;
    let mut clock = start;
    let mut tiles = Vec::with_capacity(bitrates.len());
    for &r in bitrates {
        let finish = trace.integrate(clock, r * beta, exhaustion)?;
        tiles.push(TileDownload {
            start: clock,
            finish,
        });
        clock = finish;
    }
    let duration = clock - start;
    let bits: f64 = bitrates.iter().sum::<f64>() * beta;
    let dbar = if duration > 0.0 {
        bits / duration
    } else {
        trace
            .rate_at(start, exhaustion)
            .unwrap_or_else(|| trace.d_max())
    };
    let buffer_before = state.buffer;
    let buffer_after = (buffer_before - duration).max(0.0) + beta;
    *state = DownloadState {
        clock,
        buffer: buffer_after,
    };
    Ok(SegmentDownload {
        tiles,
        start,
        finish: clock,
        duration,
        dbar,
        buffer_before,
        buffer_after,
    })
}
