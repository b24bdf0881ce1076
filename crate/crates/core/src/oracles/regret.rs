use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimum::{coordinate_bound, per_segment_optimum, OptimumMethod};
use crate::model::{BitrateLadder, DecisionMode};
use crate::policy::{compute_j, BatchMember};
use crate::qoe::{per_segment_qoe, per_segment_subgradient, QoeParams};
use crate::sim::SessionLog;
use crate::{Error, Result};

/// Dynamic regret of a session against per-segment optima. Vectors are
/// indexed by segment, 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    /// `r*_i`.
    pub optima: Vec<Vec<f64>>,
    /// `Q~_i(r*_i)`.
    pub optimal_values: Vec<f64>,
    /// `Q~_i(r^o_i)`.
    pub actual_values: Vec<f64>,
    /// `prefix[i - 1] = Reg_i`.
    pub prefix: Vec<f64>,
    pub total: f64,
    pub per_segment: f64,
}

/// Regret of the logged decisions. Both terms of every summand are
/// evaluated in the realized context of the logged trajectory.
pub fn dynamic_regret(
    log: &SessionLog,
    params: &QoeParams,
    ladder: &BitrateLadder,
    mode: DecisionMode,
    method: OptimumMethod,
) -> Result<RegretReport> {
    let contexts = log.contexts();
    let solved: Vec<(Vec<f64>, f64, f64)> = contexts
        .par_iter()
        .zip(&log.decisions)
        .map(|(ctx, played)| {
            let opt = per_segment_optimum(ctx, params, ladder, mode, method)?;
            let actual = per_segment_qoe(played, ctx, params)?;
            Ok((opt.decision, opt.value, actual))
        })
        .collect::<Result<_>>()?;

    let mut report = RegretReport {
        optima: Vec::with_capacity(solved.len()),
        optimal_values: Vec::with_capacity(solved.len()),
        actual_values: Vec::with_capacity(solved.len()),
        prefix: Vec::with_capacity(solved.len()),
        total: 0.0,
        per_segment: 0.0,
    };
    for (decision, best, actual) in solved {
        report.total += best - actual;
        report.prefix.push(report.total);
        report.optima.push(decision);
        report.optimal_values.push(best);
        report.actual_values.push(actual);
    }
    if !report.prefix.is_empty() {
        report.per_segment = report.total / report.prefix.len() as f64;
    }
    Ok(report)
}

/// Feedback-gap and drift statistics of a session.
///
/// Indices into `j`, `j_dagger` and `h` are decision indices `i = 1..=I+1`
/// stored at `i - 1`. Segment 0 stands for the initial decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStats {
    /// Number of empty feedback batches among `i = 2..=I+1`.
    pub v_empty: usize,
    /// `sum_i |I_i| * ||r*_{J_i} - r*_{J'_i}||`, Euclidean norm.
    pub v_r: f64,
    pub j: Vec<usize>,
    pub j_dagger: Vec<usize>,
    /// Last decision before `i` with a nonempty batch.
    pub h: Vec<Option<usize>>,
}

/// Condition statistics from a log, its regret report and the initial
/// decision `r0` (which plays the role of `r*_0`).
pub fn condition_stats(
    log: &SessionLog,
    report: &RegretReport,
    params: &QoeParams,
    r0: &[f64],
) -> Result<ConditionStats> {
    let count = log.segments();
    if report.optima.len() != count {
        return Err(Error::invalid("regret report does not match the log"));
    }
    let contexts = log.contexts();
    let mut grads = Vec::with_capacity(count);
    for (ctx, played) in contexts.iter().zip(&log.decisions) {
        grads.push(per_segment_subgradient(played, ctx, params)?);
    }

    let mut j = vec![0usize; count + 1];
    let mut h = vec![None; count + 1];
    let mut last_nonempty = None;
    for i in 1..=count + 1 {
        let batch = log.aux.batch(i);
        h[i - 1] = last_nonempty;
        if batch.is_empty() {
            j[i - 1] = last_nonempty.map_or(0, |p: usize| j[p - 1]);
        } else {
            let members: Vec<BatchMember<'_>> = batch
                .iter()
                .map(|&s| {
                    (
                        s,
                        grads[s - 1].as_slice(),
                        report.optima[s - 1].as_slice(),
                        log.decisions[s - 1].as_slice(),
                    )
                })
                .collect();
            j[i - 1] = compute_j(&members)?;
            last_nonempty = Some(i);
        }
    }
    let j_of = |i: usize| if i == 0 { 0 } else { j[i - 1] };
    let j_dagger: Vec<usize> = j.iter().map(|&ji| j_of(ji)).collect();
    let optimum = |s: usize| if s == 0 { r0 } else { report.optima[s - 1].as_slice() };

    let mut v_empty = 0;
    let mut v_r = 0.0;
    for i in 2..=count + 1 {
        let size = log.aux.batch(i).len();
        if size == 0 {
            v_empty += 1;
            continue;
        }
        let (a, b) = (optimum(j[i - 1]), optimum(j_dagger[i - 1]));
        let dist = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        v_r += size as f64 * dist;
    }
    Ok(ConditionStats {
        v_empty,
        v_r,
        j,
        j_dagger,
        h,
    })
}

/// Constants entering the regret bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Diameter of the decision box.
    pub radius: f64,
    /// Bound on the norm of any per-segment supergradient.
    pub q_bar: f64,
    pub tiles: usize,
    pub r_max: f64,
    pub d_min: f64,
    pub alpha: f64,
}

impl BoundConstants {
    /// Analytic constants for a session: the gradient bound uses the
    /// largest realized view weight and the trace's capacity floor.
    pub fn for_session(
        log: &SessionLog,
        params: &QoeParams,
        ladder: &BitrateLadder,
        d_min: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::invalid(format!("step size {alpha} must be positive")));
        }
        if !(d_min > 0.0) {
            return Err(Error::invalid("capacity floor must be positive"));
        }
        let tiles = log.tiles();
        let weight = log
            .omega
            .iter()
            .map(|w| w.iter().sum::<f64>())
            .fold(0.0, f64::max);
        let coord = coordinate_bound(params, tiles, weight, log.segment_length, d_min);
        Ok(BoundConstants {
            radius: ladder.diameter(tiles),
            q_bar: (tiles as f64).sqrt() * coord,
            tiles,
            r_max: ladder.max(),
            d_min,
            alpha,
        })
    }
}

/// Upper bound on the dynamic regret of the online learner after
/// `segments` segments.
pub fn regret_bound(
    stats: &ConditionStats,
    consts: &BoundConstants,
    segments: usize,
    has_tail: bool,
) -> f64 {
    let BoundConstants {
        radius: r,
        q_bar: q,
        alpha: a,
        ..
    } = *consts;
    let r2 = r * r;
    let mut bound = r2 * (1.0 + stats.v_empty as f64) / (2.0 * a)
        + r * stats.v_r / a
        + a * q * q * segments as f64 / 2.0;
    if has_tail {
        let lag = consts.tiles as f64 * consts.r_max / consts.d_min;
        bound += lag * (3.0 * r2 / (2.0 * a) + a * q * q / 2.0);
    }
    bound
}

/// Whether any segment's realizations arrive only after the last download
/// has finished.
pub fn has_tail(log: &SessionLog) -> bool {
    let last = log.downloads.last().map_or(0.0, |d| d.finish);
    log.reveal_times.iter().any(|&t| t > last)
}
