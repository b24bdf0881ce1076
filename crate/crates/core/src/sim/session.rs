use serde::{Deserialize, Serialize};

use super::aux::AuxSets;
use super::download::{step_download, DownloadState, SegmentDownload};
use super::playback::{playback_update, Playback};
use crate::model::{BitrateLadder, CapacityTrace, DecisionMode, Exhaustion, OverlapMap, VideoConfig};
use crate::qoe::{self, QoeBreakdown, QoeParams, SegmentContext, SegmentOutcome};
use crate::{Error, Result};

/// When a segment's realizations (overlap and average capacity) become
/// visible to the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reveal {
    /// Once the segment has finished playing.
    #[default]
    Playback,
    /// As soon as the segment has finished downloading.
    Download,
}

impl std::str::FromStr for Reveal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "playback" => Ok(Reveal::Playback),
            "download" => Ok(Reveal::Download),
            other => Err(Error::Config(format!(
                "unknown reveal `{other}` (expected playback or download)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub video: VideoConfig,
    pub ladder: BitrateLadder,
    pub mode: DecisionMode,
    pub exhaustion: Exhaustion,
    pub reveal: Reveal,
}

/// Realized environment of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionInputs {
    pub capacity: CapacityTrace,
    pub omega: OverlapMap,
}

/// A segment whose realizations the policy may now use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revealed {
    /// 1-based segment index.
    pub segment: usize,
    /// Bitrates actually downloaded for the segment.
    pub decision: Vec<f64>,
    pub context: SegmentContext,
}

/// Everything a policy observes when deciding segment `segment`.
#[derive(Debug, Clone, Copy)]
pub struct DecisionInput<'a> {
    /// 1-based index of the segment being decided.
    pub segment: usize,
    /// Segments newly revealed since the previous decision, in index order.
    pub revealed: &'a [Revealed],
    /// Measured throughput of the most recent download, if any.
    pub last_throughput: Option<f64>,
}

/// An online bitrate-selection rule.
pub trait Policy {
    fn name(&self) -> String;

    /// Per-tile bitrates for `input.segment`.
    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<Vec<f64>>;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<Vec<f64>> {
        (**self).decide(input)
    }
}

/// Full record of one simulated session. Segment-indexed vectors are
/// 0-based (entry `i - 1` is segment `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub policy: String,
    pub segment_length: f64,
    pub initial_buffer: f64,
    pub decisions: Vec<Vec<f64>>,
    pub downloads: Vec<SegmentDownload>,
    pub playback: Vec<Playback>,
    pub omega: Vec<Vec<f64>>,
    pub mus: Vec<f64>,
    /// When each segment's realizations became visible.
    pub reveal_times: Vec<f64>,
    pub aux: AuxSets,
}

impl SessionLog {
    pub fn segments(&self) -> usize {
        self.decisions.len()
    }

    pub fn tiles(&self) -> usize {
        self.decisions.first().map_or(0, Vec::len)
    }

    /// Buffer occupancy after each segment's download.
    pub fn buffers(&self) -> Vec<f64> {
        self.downloads.iter().map(|d| d.buffer_after).collect()
    }

    pub fn total_rebuffer(&self) -> f64 {
        self.playback.iter().map(|p| p.rebuffer).sum()
    }

    /// Realized per-segment context, conditioned on the played trajectory.
    pub fn context(&self, i: usize) -> SegmentContext {
        let idx = i - 1;
        SegmentContext {
            omega: self.omega[idx].clone(),
            prev_mu: if idx == 0 { 0.0 } else { self.mus[idx - 1] },
            buffer_before: self.downloads[idx].buffer_before,
            dbar: self.downloads[idx].dbar,
            beta: self.segment_length,
        }
    }

    pub fn contexts(&self) -> Vec<SegmentContext> {
        (1..=self.segments()).map(|i| self.context(i)).collect()
    }

    /// Session QoE of the realized trajectory.
    pub fn qoe(&self, params: &QoeParams) -> Result<QoeBreakdown> {
        let outcomes: Vec<SegmentOutcome<'_>> = (0..self.segments())
            .map(|i| SegmentOutcome {
                omega: &self.omega[i],
                bitrates: &self.decisions[i],
                download_duration: self.downloads[i].duration,
                buffer_before: self.downloads[i].buffer_before,
            })
            .collect();
        qoe::total_qoe(&outcomes, params)
    }
}

fn check_decision(
    segment: usize,
    decision: &[f64],
    tiles: usize,
    ladder: &BitrateLadder,
    mode: DecisionMode,
) -> Result<()> {
    if decision.len() != tiles {
        return Err(Error::InvalidDecision {
            segment,
            reason: format!("expected {tiles} tile bitrates, got {}", decision.len()),
        });
    }
    if let Some(&bad) = decision.iter().find(|&&r| !ladder.admits(r, mode)) {
        let reason = match mode {
            DecisionMode::Discrete => format!("{bad} Mbps is not a ladder level"),
            DecisionMode::Convex => format!(
                "{bad} Mbps outside [{}, {}]",
                ladder.min(),
                ladder.max()
            ),
        };
        return Err(Error::InvalidDecision { segment, reason });
    }
    Ok(())
}

/// Runs `policy` over the whole video.
///
/// At each decision instant the policy receives the segments whose reveal
/// time has passed, then its decision is downloaded and scheduled for
/// playback. Segments still unrevealed at the end form the final batch.
pub fn run_session<P: Policy + ?Sized>(
    policy: &mut P,
    inputs: &SessionInputs,
    config: &SimConfig,
) -> Result<SessionLog> {
    let video = config.video;
    let count = video.segments;
    if inputs.omega.segments() < count {
        return Err(Error::invalid(format!(
            "overlap map covers {} segments, video has {count}",
            inputs.omega.segments()
        )));
    }
    let tiles = inputs.omega.tiles();
    let beta = video.segment_length;

    let mut state = DownloadState::initial(video.initial_buffer);
    let mut prev_end = video.initial_buffer;
    let mut log = SessionLog {
        policy: policy.name(),
        segment_length: beta,
        initial_buffer: video.initial_buffer,
        decisions: Vec::with_capacity(count),
        downloads: Vec::with_capacity(count),
        playback: Vec::with_capacity(count),
        omega: Vec::with_capacity(count),
        mus: Vec::with_capacity(count),
        reveal_times: Vec::with_capacity(count),
        aux: AuxSets {
            sets: Vec::with_capacity(count + 1),
            revealed_at: vec![0; count],
        },
    };
    // (reveal time, segment) in download order; reveal times are nondecreasing.
    let mut pending: std::collections::VecDeque<(f64, Revealed)> = Default::default();

    for i in 1..=count {
        let now = state.clock;
        let mut batch = Vec::new();
        while pending.front().is_some_and(|(t, _)| *t <= now) {
            let (_, r) = pending.pop_front().expect("front checked");
            log.aux.revealed_at[r.segment - 1] = i;
            batch.push(r);
        }
        log.aux.sets.push(batch.iter().map(|r| r.segment).collect());

        let input = DecisionInput {
            segment: i,
            revealed: &batch,
            last_throughput: log.downloads.last().map(|d| d.dbar),
        };
        let decision = policy.decide(&input)?;
        check_decision(i, &decision, tiles, &config.ladder, config.mode)?;

        let download = step_download(&decision, beta, &inputs.capacity, config.exhaustion, &mut state)?;
        let play = playback_update(prev_end, download.finish, beta);
        prev_end = play.end;

        let omega = inputs.omega.segment(i - 1).to_vec();
        let mu = qoe::viewing_bitrate(&omega, &decision)?;
        let context = SegmentContext {
            omega: omega.clone(),
            prev_mu: log.mus.last().copied().unwrap_or(0.0),
            buffer_before: download.buffer_before,
            dbar: download.dbar,
            beta,
        };
        let reveal_time = match config.reveal {
            Reveal::Playback => play.end,
            Reveal::Download => download.finish,
        };
        pending.push_back((
            reveal_time,
            Revealed {
                segment: i,
                decision: decision.clone(),
                context,
            },
        ));

        log.decisions.push(decision);
        log.downloads.push(download);
        log.playback.push(play);
        log.omega.push(omega);
        log.mus.push(mu);
        log.reveal_times.push(reveal_time);
    }
    let tail: Vec<usize> = pending.iter().map(|(_, r)| r.segment).collect();
    for &j in &tail {
        log.aux.revealed_at[j - 1] = count + 1;
    }
    log.aux.sets.push(tail);
    Ok(log)
}
