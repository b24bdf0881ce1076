use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{compute_j, ogd_update, rate_limit, BatchMember};
use crate::model::{BitrateLadder, DecisionMode};
use crate::oracles::{per_segment_optimum, OptimumMethod};
use crate::qoe::{per_segment_subgradient, QoeParams, SegmentContext};
use crate::sim::{DecisionInput, Policy};
use crate::{Error, Result};

/// Step size of the proximal update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepSize {
    Fixed { alpha: f64 },
    /// `alpha0 * segments^(-1/gamma)` for a known horizon of `segments`.
    Horizon {
        alpha0: f64,
        gamma: f64,
        segments: usize,
    },
}

impl StepSize {
    pub fn alpha(&self) -> f64 {
        match *self {
            StepSize::Fixed { alpha } => alpha,
            StepSize::Horizon {
                alpha0,
                gamma,
                segments,
            } => alpha0 * (segments as f64).powf(-1.0 / gamma),
        }
    }
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize::Fixed { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obs360Options {
    pub step: StepSize,
    /// Limit each tile to one ladder level of change per segment. Ignored in
    /// convex mode.
    pub rate_limit: bool,
    /// First decision; every tile at the median level when unset.
    pub initial: Option<Vec<f64>>,
    /// Solver for the per-segment optima of revealed segments.
    pub method: OptimumMethod,
}

impl Default for Obs360Options {
    fn default() -> Self {
        Obs360Options {
            step: StepSize::default(),
            rate_limit: true,
            initial: None,
            method: OptimumMethod::Auto,
        }
    }
}

/// What the learner keeps about a revealed segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    /// The decision that was downloaded.
    pub decision: Vec<f64>,
    pub context: SegmentContext,
    /// Supergradient of the segment's relaxed QoE at `decision`.
    pub grad: Vec<f64>,
    pub optimum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    /// Decision before rate limiting.
    pub last: Vec<f64>,
    /// Decision actually emitted.
    pub modified: Vec<f64>,
    pub archive: BTreeMap<usize, ArchiveEntry>,
    pub alpha: f64,
}

/// Online gradient learner that tolerates delayed, batched feedback.
///
/// When feedback for a batch of segments arrives, it takes a proximal step
/// from the decision of the single batch member whose gradient points most
/// directly at that member's optimum. Without feedback it repeats the
/// previous decision.
#[derive(Debug, Clone)]
pub struct Obs360 {
    name: String,
    ladder: BitrateLadder,
    mode: DecisionMode,
    params: QoeParams,
    rate_limit: bool,
    method: OptimumMethod,
    state: PolicyState,
}

impl Obs360 {
    pub fn new(
        name: &str,
        ladder: BitrateLadder,
        mode: DecisionMode,
        tiles: usize,
        params: QoeParams,
        options: Obs360Options,
    ) -> Result<Self> {
        let alpha = options.step.alpha();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("step size {alpha} must be positive")));
        }
        let initial = match options.initial {
            Some(r) => {
                if r.len() != tiles || r.iter().any(|&x| !ladder.admits(x, mode)) {
                    return Err(Error::Config(format!(
                        "initial decision {r:?} is not a {tiles}-tile point of the decision set"
                    )));
                }
                r
            }
            None => vec![ladder.level(ladder.median_level()); tiles],
        };
        Ok(Obs360 {
            name: name.to_string(),
            ladder,
            mode,
            params,
            rate_limit: options.rate_limit && mode == DecisionMode::Discrete,
            method: options.method,
            state: PolicyState {
                last: initial.clone(),
                modified: initial,
                archive: BTreeMap::new(),
                alpha,
            },
        })
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }
}

impl Policy for Obs360 {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<Vec<f64>> {
        for rev in input.revealed {
            let grad = per_segment_subgradient(&rev.decision, &rev.context, &self.params)?;
            let optimum = per_segment_optimum(
                &rev.context,
                &self.params,
                &self.ladder,
                self.mode,
                self.method,
            )?
            .decision;
            self.state.archive.insert(
                rev.segment,
                ArchiveEntry {
                    decision: rev.decision.clone(),
                    context: rev.context.clone(),
                    grad,
                    optimum,
                },
            );
        }
        if input.revealed.is_empty() {
            return Ok(self.state.modified.clone());
        }
        let members: Vec<BatchMember<'_>> = input
            .revealed
            .iter()
            .map(|rev| {
                let e = &self.state.archive[&rev.segment];
                (
                    rev.segment,
                    e.grad.as_slice(),
                    e.optimum.as_slice(),
                    e.decision.as_slice(),
                )
            })
            .collect();
        let j = compute_j(&members)?;
        let base = &self.state.archive[&j];
        let next = ogd_update(&base.decision, &base.grad, self.state.alpha, &self.ladder, self.mode)?;
        let emitted = if self.rate_limit {
            rate_limit(&next, &self.state.modified, &self.ladder)?
        } else {
            next.clone()
        };
        self.state.last = next;
        self.state.modified.clone_from(&emitted);
        Ok(emitted)
    }
}
