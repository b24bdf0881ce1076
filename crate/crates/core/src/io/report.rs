//! Per-segment CSV and JSON summaries of finished runs.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::oracles::{
    condition_stats, dynamic_regret, has_tail, offline_optimal, regret_bound, BoundConstants,
    ConditionStats, OfflineOptimum, RegretReport,
};
use crate::policy::from_name;
use crate::qoe::QoeBreakdown;
use crate::sim::{run_session, SessionLog};
use crate::{Error, Result};

use super::config::Scenario;

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn num(x: f64) -> Value {
    json!(round12(x))
}

/// Everything measured about one policy's session.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub log: SessionLog,
    pub qoe: QoeBreakdown,
    pub regret: RegretReport,
    pub stats: ConditionStats,
    /// Regret guarantee, reported for the online learner only.
    pub bound: Option<f64>,
    pub has_tail: bool,
}

/// Simulates policy `name` and analyses its regret.
pub fn run_policy(scenario: &Scenario, name: &str) -> Result<RunOutcome> {
    let mut policy = from_name(name, &scenario.policies)?;
    let log = run_session(&mut policy, &scenario.inputs, &scenario.sim)?;
    let qoe = log.qoe(&scenario.params)?;
    let opts = &scenario.policies.obs360;
    let regret = dynamic_regret(
        &log,
        &scenario.params,
        &scenario.sim.ladder,
        scenario.sim.mode,
        opts.method,
    )?;
    let r0 = opts
        .initial
        .clone()
        .unwrap_or_else(|| vec![scenario.sim.ladder.level(scenario.sim.ladder.median_level()); log.tiles()]);
    let stats = condition_stats(&log, &regret, &scenario.params, &r0)?;
    let tail = has_tail(&log);
    let bound = if name.starts_with("obs360") {
        let consts = BoundConstants::for_session(
            &log,
            &scenario.params,
            &scenario.sim.ladder,
            scenario.inputs.capacity.d_min(),
            opts.step.alpha(),
        )?;
        Some(regret_bound(&stats, &consts, log.segments(), tail))
    } else {
        None
    };
    Ok(RunOutcome {
        log,
        qoe,
        regret,
        stats,
        bound,
        has_tail: tail,
    })
}

/// One row per segment: decision, viewing bitrate, buffer after download,
/// stall, decision and finish times, average capacity, the decision index
/// at which the segment was revealed, and the segments revealed at its own
/// decision.
pub fn session_csv(log: &SessionLog) -> String {
    let tiles = log.tiles();
    let mut out = String::from("segment");
    for k in 1..=tiles {
        out.push_str(&format!(",r_{k}"));
    }
    out.push_str(",mu,buffer,rebuffer,decision_time,finish_time,dbar,revealed_at,aux_set\n");
    for i in 0..log.segments() {
        let d = &log.downloads[i];
        out.push_str(&(i + 1).to_string());
        for r in &log.decisions[i] {
            out.push_str(&format!(",{}", round12(*r)));
        }
        let aux: Vec<String> = log.aux.sets[i].iter().map(|s| s.to_string()).collect();
        out.push_str(&format!(
            ",{},{},{},{},{},{},{},{}\n",
            round12(log.mus[i]),
            round12(d.buffer_after),
            round12(log.playback[i].rebuffer),
            round12(d.start),
            round12(d.finish),
            round12(d.dbar),
            log.aux.revealed_at[i],
            aux.join(";")
        ));
    }
    out
}

fn qoe_json(q: &QoeBreakdown) -> Value {
    json!({
        "total": num(q.total),
        "utility": num(q.utility),
        "rebuffer_loss": num(q.rebuffer),
        "inter_degradation": num(q.inter),
        "intra_degradation": num(q.intra),
    })
}

fn session_totals(log: &SessionLog, q: &QoeBreakdown) -> Map<String, Value> {
    let n = log.segments().max(1) as f64;
    let mut m = Map::new();
    m.insert("policy".into(), json!(log.policy));
    m.insert("segments".into(), json!(log.segments()));
    m.insert("qoe".into(), qoe_json(q));
    m.insert("mean_viewing_bitrate".into(), num(log.mus.iter().sum::<f64>() / n));
    m.insert("total_rebuffer_s".into(), num(log.total_rebuffer()));
    m.insert("mean_rebuffer_s".into(), num(log.total_rebuffer() / n));
    m
}

pub fn summary_json(outcome: &RunOutcome) -> Value {
    let mut m = session_totals(&outcome.log, &outcome.qoe);
    m.insert("regret".into(), num(outcome.regret.total));
    m.insert("regret_per_segment".into(), num(outcome.regret.per_segment));
    m.insert("v_empty".into(), json!(outcome.stats.v_empty));
    m.insert("v_r".into(), num(outcome.stats.v_r));
    m.insert("has_tail".into(), json!(outcome.has_tail));
    m.insert(
        "regret_bound".into(),
        outcome.bound.map_or(Value::Null, num),
    );
    Value::Object(m)
}

pub fn offline_summary_json(opt: &OfflineOptimum) -> Value {
    Value::Object(session_totals(&opt.log, &opt.qoe))
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `session.csv` and `summary.json` into `dir`.
pub fn write_run(dir: &Path, outcome: &RunOutcome) -> Result<()> {
    write(&dir.join("session.csv"), &session_csv(&outcome.log))?;
    write(&dir.join("summary.json"), &to_pretty(&summary_json(outcome)))
}

/// Runs every policy of `names` (in parallel) on the same scenario.
pub fn compare(scenario: &Scenario, names: &[String]) -> Result<Vec<(String, RunOutcome)>> {
    use rayon::prelude::*;
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(Error::Config(format!("policy `{dup}` listed twice")));
    }
    names
        .par_iter()
        .map(|n| Ok((n.clone(), run_policy(scenario, n)?)))
        .collect()
}

/// Per-policy subdirectories plus a top-level `summary.json` keyed by
/// policy name.
pub fn write_compare(dir: &Path, runs: &[(String, RunOutcome)]) -> Result<()> {
    let mut all = Map::new();
    for (name, outcome) in runs {
        write_run(&dir.join(sanitize(name)), outcome)?;
        all.insert(name.clone(), summary_json(outcome));
    }
    write(&dir.join("summary.json"), &to_pretty(&Value::Object(all)))
}

/// Directory name for a policy (`constant:median` becomes `constant-median`).
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

pub fn offline(scenario: &Scenario) -> Result<OfflineOptimum> {
    offline_optimal(&scenario.inputs, &scenario.sim, &scenario.params)
}

pub fn write_offline(dir: &Path, opt: &OfflineOptimum) -> Result<()> {
    write(&dir.join("session.csv"), &session_csv(&opt.log))?;
    write(&dir.join("summary.json"), &to_pretty(&offline_summary_json(opt)))
}
