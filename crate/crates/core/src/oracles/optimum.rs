//! Solvers for the single-segment problem `max_r Q~_i(r)` over the ladder
//! (discrete) or its hull (convex).

use serde::{Deserialize, Serialize};

use super::simplex;
use crate::model::{BitrateLadder, DecisionMode};
use crate::qoe::{per_segment_qoe, per_segment_subgradient, QoeParams, SegmentContext};
use crate::{Error, Result};

/// Largest ladder^K the exhaustive solver will enumerate.
pub const EXHAUSTIVE_LIMIT: f64 = 1e6;
/// Below this many candidates [`OptimumMethod::Auto`] enumerates exhaustively.
pub const AUTO_EXHAUSTIVE_LIMIT: f64 = 4096.0;
/// Projected-ascent iterations used by [`OptimumMethod::PgRound`].
pub const PG_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimumMethod {
    /// Exact argmax over ladder^K.
    Exhaustive,
    /// Projected supergradient ascent on the hull, rounding, local search.
    PgRound,
    /// Exact maximum over the continuous box `[R_1, R_max]^K`.
    Hull,
    /// `Hull` in convex mode; otherwise `Exhaustive` for small ladder^K and
    /// `PgRound` beyond.
    #[default]
    Auto,
}

impl OptimumMethod {
    pub fn resolve(self, mode: DecisionMode, ladder: &BitrateLadder, tiles: usize) -> Self {
        match (self, mode) {
            (OptimumMethod::Auto, DecisionMode::Convex) => OptimumMethod::Hull,
            (OptimumMethod::Auto, DecisionMode::Discrete) => {
                if (ladder.len() as f64).powi(tiles as i32) <= AUTO_EXHAUSTIVE_LIMIT {
                    OptimumMethod::Exhaustive
                } else {
                    OptimumMethod::PgRound
                }
            }
            (m, _) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub decision: Vec<f64>,
    pub value: f64,
}

/// Per-coordinate bound on `|dQ~/dr_k|` for a context with total view
/// weight `view_weight` and capacity no lower than `dbar`.
pub(crate) fn coordinate_bound(
    params: &QoeParams,
    tiles: usize,
    view_weight: f64,
    beta: f64,
    dbar: f64,
) -> f64 {
    params.utility.derivative(0.0) * view_weight
        + params.inter * view_weight
        + params.intra * tiles as f64
        + params.rebuffer * beta / dbar
}

/// Best decision for one segment. `mode` only matters for
/// [`OptimumMethod::Auto`].
pub fn per_segment_optimum(
    ctx: &SegmentContext,
    params: &QoeParams,
    ladder: &BitrateLadder,
    mode: DecisionMode,
    method: OptimumMethod,
) -> Result<Optimum> {
    let tiles = ctx.tiles();
    match method.resolve(mode, ladder, tiles) {
        OptimumMethod::Exhaustive => exhaustive(ctx, params, ladder),
        OptimumMethod::PgRound => pg_round(ctx, params, ladder),
        OptimumMethod::Hull => hull(ctx, params, ladder),
        OptimumMethod::Auto => unreachable!("resolved above"),
    }
}

fn exhaustive(ctx: &SegmentContext, params: &QoeParams, ladder: &BitrateLadder) -> Result<Optimum> {
    let tiles = ctx.tiles();
    let count = (ladder.len() as f64).powi(tiles as i32);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::InstanceTooLarge {
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut levels = vec![0usize; tiles];
    let mut r: Vec<f64> = vec![ladder.min(); tiles];
    let mut best = Optimum {
        decision: r.clone(),
        value: per_segment_qoe(&r, ctx, params)?,
    };
    // odometer over ladder^K, last tile fastest
    loop {
        let mut k = tiles;
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            levels[k] += 1;
            if levels[k] < ladder.len() {
                r[k] = ladder.level(levels[k]);
                break;
            }
            levels[k] = 0;
            r[k] = ladder.min();
        }
        let v = per_segment_qoe(&r, ctx, params)?;
        if v > best.value {
            best = Optimum {
                decision: r.clone(),
                value: v,
            };
        }
    }
}

fn pg_round(ctx: &SegmentContext, params: &QoeParams, ladder: &BitrateLadder) -> Result<Optimum> {
    let tiles = ctx.tiles();
    let (lo, hi) = (ladder.min(), ladder.max());
    let weight: f64 = ctx.omega.iter().sum();
    let q_bar = (tiles as f64).sqrt() * coordinate_bound(params, tiles, weight, ctx.beta, ctx.dbar);
    let c = if q_bar > 0.0 { (hi - lo) / q_bar } else { 0.0 };

    let mut x = vec![0.5 * (lo + hi); tiles];
    let mut best_x = x.clone();
    let mut best_v = per_segment_qoe(&x, ctx, params)?;
    for t in 1..=PG_ITERATIONS {
        let g = per_segment_subgradient(&x, ctx, params)?;
        let step = c / (t as f64).sqrt();
        for (xk, gk) in x.iter_mut().zip(&g) {
            *xk = (*xk + step * gk).clamp(lo, hi);
        }
        let v = per_segment_qoe(&x, ctx, params)?;
        if v > best_v {
            best_v = v;
            best_x.clone_from(&x);
        }
    }

    let mut levels: Vec<usize> = best_x.iter().map(|&v| ladder.nearest_level(v)).collect();
    let mut r: Vec<f64> = levels.iter().map(|&l| ladder.level(l)).collect();
    let mut value = per_segment_qoe(&r, ctx, params)?;
    local_search(ctx, params, ladder, &mut levels, &mut r, &mut value)?;
    Ok(Optimum { decision: r, value })
}

/// Improves `r` by single-tile level changes, then by simultaneous changes of
/// two tiles, until neither helps.
fn local_search(
    ctx: &SegmentContext,
    params: &QoeParams,
    ladder: &BitrateLadder,
    levels: &mut [usize],
    r: &mut [f64],
    value: &mut f64,
) -> Result<()> {
    let tiles = r.len();
    let n = ladder.len();
    loop {
        let mut improved = false;
        for k in 0..tiles {
            let keep = levels[k];
            let mut best = (keep, *value);
            for l in 0..n {
                if l == keep {
                    continue;
                }
                r[k] = ladder.level(l);
                let v = per_segment_qoe(r, ctx, params)?;
                if v > best.1 {
                    best = (l, v);
                }
            }
            levels[k] = best.0;
            r[k] = ladder.level(best.0);
            if best.0 != keep {
                *value = best.1;
                improved = true;
            }
        }
        if improved {
            continue;
        }
        'pairs: for a in 0..tiles {
            for b in a + 1..tiles {
                let (ka, kb) = (levels[a], levels[b]);
                for la in 0..n {
                    for lb in 0..n {
                        if la == ka && lb == kb {
                            continue;
                        }
                        r[a] = ladder.level(la);
                        r[b] = ladder.level(lb);
                        let v = per_segment_qoe(r, ctx, params)?;
                        if v > *value {
                            levels[a] = la;
                            levels[b] = lb;
                            *value = v;
                            improved = true;
                            break 'pairs;
                        }
                    }
                }
                r[a] = ladder.level(ka);
                r[b] = ladder.level(kb);
            }
        }
        if !improved {
            return Ok(());
        }
    }
}

// Relative gap at which the utility cutting planes are considered exact.
const CUT_TOL: f64 = 1e-12;
const MAX_CUTS: usize = 200;

/// Exact maximum over the box `[R_1, R_max]^K`.
///
/// The objective is concave and piecewise linear apart from the utility, so
/// it is solved as a linear program in shifted bitrates `x = r - R_1`, one
/// shortfall variable per viewed tile and an epigraph variable for the
/// utility. The utility is outer-approximated by tangent cuts that are added
/// until the approximation is tight at the LP optimum.
fn hull(ctx: &SegmentContext, params: &QoeParams, ladder: &BitrateLadder) -> Result<Optimum> {
    let tiles = ctx.tiles();
    let (lo, hi) = (ladder.min(), ladder.max());
    let span = hi - lo;
    let omega = &ctx.omega;
    let weight: f64 = omega.iter().sum();
    let viewed: Vec<usize> = (0..tiles).filter(|&k| omega[k] > 0.0).collect();
    let time_cost = params.rebuffer * ctx.beta / ctx.dbar;
    let mu_lo = lo * weight;

    // variables: x_0..x_{K-1}, s_j for viewed j, z
    let n_vars = tiles + viewed.len() + 1;
    let z = n_vars - 1;
    let mut c = vec![0.0; n_vars];
    for k in 0..tiles {
        c[k] = params.inter * omega[k] - time_cost;
    }
    for (slot, &j) in viewed.iter().enumerate() {
        c[tiles + slot] = -params.intra * omega[j];
    }
    c[z] = 1.0;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for k in 0..tiles {
        let mut row = vec![0.0; n_vars];
        row[k] = 1.0;
        rows.push(row);
        rhs.push(span);
    }
    for (slot, &j) in viewed.iter().enumerate() {
        // mean(x) - x_j - s_j <= 0
        let mut row = vec![0.0; n_vars];
        for k in 0..tiles {
            row[k] = omega[k] / weight;
        }
        row[j] -= 1.0;
        row[tiles + slot] = -1.0;
        rows.push(row);
        rhs.push(0.0);
    }
    let utility = params.utility;
    let add_cut = |rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, mu: f64| -> Result<()> {
        // z <= u(mu) + u'(mu) (mu_lo + omega.x - mu)
        let slope = utility.derivative(mu);
        let mut row = vec![0.0; n_vars];
        for k in 0..tiles {
            row[k] = -slope * omega[k];
        }
        row[z] = 1.0;
        rows.push(row);
        rhs.push((utility.value(mu)? + slope * (mu_lo - mu)).max(0.0));
        Ok(())
    };
    add_cut(&mut rows, &mut rhs, mu_lo)?;
    add_cut(&mut rows, &mut rhs, hi * weight)?;

    let mut x = vec![0.0; n_vars];
    for _ in 0..MAX_CUTS {
        x = simplex::maximize(&c, &rows, &rhs)
            .ok_or_else(|| Error::invalid("per-segment linear program is unbounded"))?;
        let mu = mu_lo + (0..tiles).map(|k| omega[k] * x[k]).sum::<f64>();
        let u = utility.value(mu.max(0.0))?;
        if x[z] - u <= CUT_TOL * (1.0 + u.abs()) {
            break;
        }
        add_cut(&mut rows, &mut rhs, mu)?;
    }
    let decision: Vec<f64> = x[..tiles].iter().map(|&v| (lo + v).clamp(lo, hi)).collect();
    let value = per_segment_qoe(&decision, ctx, params)?;
    Ok(Optimum { decision, value })
}
