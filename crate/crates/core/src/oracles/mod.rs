//! Ground-truth solvers and regret analysis.
//!
//! * [`per_segment_optimum`] maximizes the relaxed single-segment QoE.
//! * [`offline_optimal`] enumerates every decision sequence of a tiny
//!   instance with full knowledge of the traces.
//! * [`dynamic_regret`], [`condition_stats`] and [`regret_bound`] measure an
//!   online run against per-segment optima and evaluate the theoretical
//!   guarantee for it.

mod offline;
mod optimum;
mod regret;
mod simplex;

pub use offline::{offline_optimal, OfflineOptimum, OFFLINE_LIMIT};
pub use optimum::{
    per_segment_optimum, Optimum, OptimumMethod, AUTO_EXHAUSTIVE_LIMIT, EXHAUSTIVE_LIMIT,
    PG_ITERATIONS,
};
pub use regret::{
    condition_stats, dynamic_regret, has_tail, regret_bound, BoundConstants, ConditionStats,
    RegretReport,
};
