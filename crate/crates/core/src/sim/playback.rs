use serde::{Deserialize, Serialize};

/// Playback interval of one segment and the stall that preceded it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Playback {
    pub start: f64,
    pub end: f64,
    pub rebuffer: f64,
}

/// Schedules a segment that finished downloading at `finish`, after the
/// previous segment ended playing at `prev_end` (the initial buffer length
/// for the first segment).
pub fn playback_update(prev_end: f64, finish: f64, beta: f64) -> Playback {
    let start = prev_end.max(finish);
    Playback {
        start,
        end: start + beta,
        rebuffer: (finish - prev_end).max(0.0),
    }
}
