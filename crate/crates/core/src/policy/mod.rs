//! Bitrate-selection policies: the OBS360 online learner and simple
//! baselines.

mod baselines;
mod obs360;

pub use baselines::{Constant, GreedyCapacity, Scripted};
pub use obs360::{ArchiveEntry, Obs360, Obs360Options, PolicyState, StepSize};

use crate::model::{BitrateLadder, DecisionMode};
use crate::qoe::QoeParams;
use crate::sim::Policy;
use crate::{Error, Result};

/// `(segment, supergradient, optimum, played decision)` of a revealed segment.
pub type BatchMember<'a> = (usize, &'a [f64], &'a [f64], &'a [f64]);

/// Picks the revealed segment whose decision had the most promising ascent
/// direction: the argmin over members `(j, grad_j, r*_j, r^o_j)` of
/// `-grad_j . (r*_j - r^o_j)`. Ties go to the smallest segment index.
pub fn compute_j(members: &[BatchMember<'_>]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &(j, grad, opt, played) in members {
        let score: f64 = -grad
            .iter()
            .zip(opt.iter().zip(played))
            .map(|(g, (o, p))| g * (o - p))
            .sum::<f64>();
        let better = match best {
            None => true,
            Some((bj, bs)) => score < bs || (score == bs && j < bj),
        };
        if better {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j)
        .ok_or_else(|| Error::invalid("no revealed segment to learn from"))
}

/// Proximal gradient step from `r_j`:
/// `argmin_r -grad . (r - r_j) + ||r - r_j||^2 / (2 alpha)` over the
/// decision set.
///
/// The objective separates by tile. In discrete mode each tile takes
/// whichever ladder neighbour of `r_j + alpha * grad` scores lower, the lower
/// level on ties; in convex mode the target is clipped to the ladder range.
pub fn ogd_update(
    r_j: &[f64],
    grad: &[f64],
    alpha: f64,
    ladder: &BitrateLadder,
    mode: DecisionMode,
) -> Result<Vec<f64>> {
    if r_j.len() != grad.len() {
        return Err(Error::invalid("gradient and decision differ in length"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("step size {alpha} must be positive")));
    }
    Ok(r_j
        .iter()
        .zip(grad)
        .map(|(&a, &g)| {
            let target = a + alpha * g;
            match mode {
                DecisionMode::Convex => ladder.clamp(target),
                DecisionMode::Discrete => {
                    let f = |x: f64| -g * (x - a) + (x - a) * (x - a) / (2.0 * alpha);
                    let (lo, hi) = ladder.bracket(target);
                    let (xl, xh) = (ladder.level(lo), ladder.level(hi));
                    if f(xh) < f(xl) {
                        xh
                    } else {
                        xl
                    }
                }
            }
        })
        .collect())
}

/// Keeps every tile within one ladder level of `prev`.
pub fn rate_limit(r_new: &[f64], prev: &[f64], ladder: &BitrateLadder) -> Result<Vec<f64>> {
    if r_new.len() != prev.len() {
        return Err(Error::invalid("decisions differ in length"));
    }
    let level = |x: f64| {
        ladder
            .level_of(x)
            .ok_or_else(|| Error::invalid(format!("{x} Mbps is not a ladder level")))
    };
    r_new
        .iter()
        .zip(prev)
        .map(|(&x, &p)| {
            let (n, p) = (level(x)?, level(p)?);
            let out = if n > p + 1 {
                p + 1
            } else if n + 1 < p {
                p - 1
            } else {
                n
            };
            Ok(ladder.level(out))
        })
        .collect()
}

/// Everything needed to build a policy by name.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyContext {
    pub ladder: BitrateLadder,
    pub mode: DecisionMode,
    pub tiles: usize,
    pub params: QoeParams,
    pub obs360: Obs360Options,
}

/// Builds one of `obs360`, `obs360-unlimited`, `constant:<median|min|max|n>`
/// (`n` a 1-based level) or `greedy-capacity`.
pub fn from_name(name: &str, ctx: &PolicyContext) -> Result<Box<dyn Policy + Send>> {
    let level = |spec: &str| -> Result<usize> {
        let n = ctx.ladder.len();
        match spec {
            "median" => Ok(ctx.ladder.median_level()),
            "min" => Ok(0),
            "max" => Ok(n - 1),
            other => match other.parse::<usize>() {
                Ok(k) if (1..=n).contains(&k) => Ok(k - 1),
                _ => Err(Error::Config(format!(
                    "constant level `{other}` is not median, min, max or 1..={n}"
                ))),
            },
        }
    };
    let policy: Box<dyn Policy + Send> = match name {
        "obs360" | "obs360-unlimited" => {
            let mut opts = ctx.obs360.clone();
            if name == "obs360-unlimited" {
                opts.rate_limit = false;
            }
            Box::new(Obs360::new(
                name,
                ctx.ladder.clone(),
                ctx.mode,
                ctx.tiles,
                ctx.params,
                opts,
            )?)
        }
        "greedy-capacity" => Box::new(GreedyCapacity::new(ctx.ladder.clone(), ctx.tiles)),
        other => match other.strip_prefix("constant:") {
            Some(spec) => Box::new(Constant::new(
                other,
                vec![ctx.ladder.level(level(spec)?); ctx.tiles],
            )),
            None => return Err(Error::Config(format!("unknown policy `{other}`"))),
        },
    };
    Ok(policy)
}
