use serde::{Deserialize, Serialize};

use crate::model::BitrateLadder;
use crate::policy::Scripted;
use crate::qoe::{self, QoeBreakdown, QoeParams};
use crate::sim::{run_session, step_download, DownloadState, SessionInputs, SessionLog, SimConfig};
use crate::{Error, Result};

/// Largest `|R|^(K*I)` that [`offline_optimal`] accepts.
pub const OFFLINE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineOptimum {
    pub decisions: Vec<Vec<f64>>,
    pub qoe: QoeBreakdown,
    /// The optimal sequence replayed through the simulator.
    pub log: SessionLog,
}

struct Search<'a> {
    inputs: &'a SessionInputs,
    config: &'a SimConfig,
    params: &'a QoeParams,
    candidates: Vec<Vec<f64>>,
    /// `tail_bound[i]`: largest utility obtainable from segments `i..`.
    tail_bound: Vec<f64>,
    path: Vec<usize>,
    best: f64,
    best_path: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, i: usize, state: DownloadState, prev_mu: f64, value: f64) -> Result<()> {
        let count = self.config.video.segments;
        if i == count {
            if value > self.best {
                self.best = value;
                self.best_path.clone_from(&self.path);
            }
            return Ok(());
        }
        if value + self.tail_bound[i] <= self.best {
            return Ok(());
        }
        let beta = self.config.video.segment_length;
        let omega = self.inputs.omega.segment(i);
        for c in 0..self.candidates.len() {
            let r = &self.candidates[c];
            let mut next = state;
            let download = step_download(
                r,
                beta,
                &self.inputs.capacity,
                self.config.exhaustion,
                &mut next,
            )?;
            let mu = qoe::viewing_bitrate(omega, r)?;
            let mut gain = self.params.utility.value(mu)?
                - self.params.rebuffer * (download.duration - download.buffer_before).max(0.0)
                - qoe::intra_degradation_loss(omega, r, self.params)?;
            if i > 0 {
                gain -= self.params.inter * (prev_mu - mu).max(0.0);
            }
            self.path.push(c);
            self.dfs(i + 1, next, mu, value + gain)?;
            self.path.pop();
        }
        Ok(())
    }
}

fn ladder_points(ladder: &BitrateLadder, tiles: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::with_capacity(tiles)];
    for _ in 0..tiles {
        points = points
            .into_iter()
            .flat_map(|p| {
                ladder.levels().iter().map(move |&l| {
                    let mut q = p.clone();
                    q.push(l);
                    q
                })
            })
            .collect();
    }
    points
}

/// Best decision sequence for a session whose traces are fully known, over
/// every sequence of ladder points.
///
/// Sequences are explored depth first with the session state carried
/// incrementally; a branch is abandoned once even the maximum remaining
/// utility cannot beat the incumbent.
pub fn offline_optimal(
    inputs: &SessionInputs,
    config: &SimConfig,
    params: &QoeParams,
) -> Result<OfflineOptimum> {
    let count = config.video.segments;
    let tiles = inputs.omega.tiles();
    let size = (config.ladder.len() as f64).powf((tiles * count) as f64);
    if size > OFFLINE_LIMIT {
        return Err(Error::InstanceTooLarge {
            count: size,
            limit: OFFLINE_LIMIT,
        });
    }
    if inputs.omega.segments() < count {
        return Err(Error::invalid(format!(
            "overlap map covers {} segments, video has {count}",
            inputs.omega.segments()
        )));
    }
    let top = config.ladder.max();
    let mut tail_bound = vec![0.0; count + 1];
    for i in (0..count).rev() {
        let weight: f64 = inputs.omega.segment(i).iter().sum();
        tail_bound[i] = tail_bound[i + 1] + params.utility.value(top * weight)?;
    }
    let mut search = Search {
        inputs,
        config,
        params,
        candidates: ladder_points(&config.ladder, tiles),
        tail_bound,
        path: Vec::with_capacity(count),
        best: f64::NEG_INFINITY,
        best_path: Vec::new(),
    };
    search.dfs(0, DownloadState::initial(config.video.initial_buffer), 0.0, 0.0)?;

    let decisions: Vec<Vec<f64>> = search
        .best_path
        .iter()
        .map(|&c| search.candidates[c].clone())
        .collect();
    let mut replay = Scripted::new("offline-optimal", decisions.clone());
    let log = run_session(&mut replay, inputs, config)?;
    let qoe = log.qoe(params)?;
    Ok(OfflineOptimum {
        decisions,
        qoe,
        log,
    })
}
