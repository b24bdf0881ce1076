mod common;

use common::{grid_points, random_context, random_params, random_session, RandomSession, LADDER};
use proptest::prelude::*;
use vastream::model::{BitrateLadder, CapacityTrace, DecisionMode, Exhaustion, OverlapMap, VideoConfig};
use vastream::oracles::{
    condition_stats, dynamic_regret, offline_optimal, per_segment_optimum, regret_bound,
    BoundConstants, ConditionStats, OptimumMethod,
};
use vastream::policy::{Constant, Scripted};
use vastream::qoe::{per_segment_qoe, QoeParams, SegmentContext, Utility};
use vastream::sim::{run_session, Reveal, SessionInputs, SimConfig};

fn ladder() -> BitrateLadder {
    BitrateLadder::new(LADDER.to_vec()).unwrap()
}

fn exhaustive_max(ctx: &SegmentContext, params: &QoeParams, levels: &[f64]) -> f64 {
    grid_points(levels, ctx.tiles())
        .iter()
        .map(|r| per_segment_qoe(r, ctx, params).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn constant_setup(rate: f64, omega: Vec<Vec<f64>>, b_ini: f64, levels: &[f64]) -> (SessionInputs, SimConfig) {
    let segments = omega.len();
    (
        SessionInputs {
            capacity: CapacityTrace::constant(rate).unwrap(),
            omega: OverlapMap::new(omega).unwrap(),
        },
        SimConfig {
            video: VideoConfig::new(segments, 1.0, b_ini).unwrap(),
            ladder: BitrateLadder::new(levels.to_vec()).unwrap(),
            mode: DecisionMode::Discrete,
            exhaustion: Exhaustion::Wrap,
            reveal: Reveal::Playback,
        },
    )
}

/// Session QoE of a two-tile decision sequence on a constant-rate link,
/// written out from the buffer recursion.
fn closed_form_qoe(seq: &[[f64; 2]], omega: &[[f64; 2]], d: f64, b_ini: f64, p: &QoeParams) -> f64 {
    let mut b = b_ini;
    let mut total = 0.0;
    let mut prev_mu: Option<f64> = None;
    for (r, w) in seq.iter().zip(omega) {
        let dur = (r[0] + r[1]) / d;
        let stall = (dur - b).max(0.0);
        b = (b - dur).max(0.0) + 1.0;
        let mu = w[0] * r[0] + w[1] * r[1];
        let weight = w[0] + w[1];
        let short = if weight > 0.0 {
            let mean = mu / weight;
            w[0] * (mean - r[0]).max(0.0) + w[1] * (mean - r[1]).max(0.0)
        } else {
            0.0
        };
        total += mu - p.rebuffer * stall - p.intra * short;
        if let Some(m) = prev_mu {
            total -= p.inter * (m - mu).max(0.0);
        }
        prev_mu = Some(mu);
    }
    total
}

#[test]
fn offline_matches_sixteen_way_enumeration() {
    let omega = [[1.0, 0.0], [0.5, 0.5]];
    let levels = [1.0, 8.0];
    let (inputs, config) = constant_setup(6.0, omega.iter().map(|w| w.to_vec()).collect(), 1.0, &levels);
    let params = QoeParams::default();
    let points = [[1.0, 1.0], [1.0, 8.0], [8.0, 1.0], [8.0, 8.0]];
    let mut best = (f64::NEG_INFINITY, vec![]);
    for a in points {
        for b in points {
            let q = closed_form_qoe(&[a, b], &omega, 6.0, 1.0, &params);
            if q > best.0 {
                best = (q, vec![a.to_vec(), b.to_vec()]);
            }
        }
    }
    // (8,1) then (8,8): utility 16, stalls 1/2 + 5/3
    assert!((best.0 - (16.0 - 13.0 / 12.0)).abs() < 1e-12);
    let opt = offline_optimal(&inputs, &config, &params).unwrap();
    assert!((opt.qoe.total - best.0).abs() < 1e-12);
    assert_eq!(opt.decisions, best.1);
}

#[test]
fn single_segment_single_tile_offline() {
    let (inputs, config) = constant_setup(10.0, vec![vec![1.0]], 2.0, &[1.0, 5.0]);
    let opt = offline_optimal(&inputs, &config, &QoeParams::default()).unwrap();
    assert_eq!(opt.decisions, vec![vec![5.0]]);
    assert!((opt.qoe.total - 5.0).abs() < 1e-12);
}

#[test]
fn offline_rejects_large_instances() {
    let (inputs, config) = constant_setup(10.0, vec![vec![0.5; 4]; 8], 2.0, &LADDER);
    assert!(matches!(
        offline_optimal(&inputs, &config, &QoeParams::default()),
        Err(vastream::Error::InstanceTooLarge { .. })
    ));
}

#[test]
fn hand_summed_drift() {
    // 10 Mbps for 1 s, 4 Mbps until t=3, then 20 Mbps; batches [], [], [1], [2, 3]
    let inputs = SessionInputs {
        capacity: CapacityTrace::from_samples(&[(0.0, 10.0), (1.0, 4.0), (3.0, 20.0)]).unwrap(),
        omega: OverlapMap::new(vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap(),
    };
    let config = SimConfig {
        video: VideoConfig::new(3, 1.0, 1.0).unwrap(),
        ladder: BitrateLadder::new(vec![1.0, 5.0, 8.0]).unwrap(),
        mode: DecisionMode::Discrete,
        exhaustion: Exhaustion::Hold,
        reveal: Reveal::Playback,
    };
    let script = vec![vec![5.0, 5.0], vec![8.0, 8.0], vec![1.0, 1.0]];
    let log = run_session(&mut Scripted::new("s", script), &inputs, &config).unwrap();
    assert_eq!(log.aux.sets, vec![vec![], vec![], vec![1], vec![2, 3]]);
    let params = QoeParams::default();
    let mut report =
        dynamic_regret(&log, &params, &config.ladder, config.mode, OptimumMethod::Exhaustive).unwrap();
    // segment 2 scores 0 against its own decision; segment 3 scores
    // -(1.075 * 7) along its gradient (-0.025, 1.075), so J_4 = 3 and J_4' = J_3 = 1
    report.optima = vec![vec![8.0, 1.0], vec![8.0, 8.0], vec![1.0, 8.0]];
    let stats = condition_stats(&log, &report, &params, &[5.0, 5.0]).unwrap();
    assert_eq!(stats.j, vec![0, 0, 1, 3]);
    assert_eq!(stats.j_dagger, vec![0, 0, 0, 1]);
    assert_eq!(stats.h, vec![None, None, None, Some(3)]);
    assert_eq!(stats.v_empty, 1);
    assert!((stats.v_r - (5.0 + 14.0 * 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn one_step_feedback_has_no_gaps() {
    let (inputs, config) = constant_setup(9.0, vec![vec![0.3, 0.7]; 4], 2.0, &LADDER);
    let config = SimConfig {
        reveal: Reveal::Download,
        ..config
    };
    let script = vec![vec![5.0, 5.0], vec![8.0, 2.5], vec![1.0, 1.0], vec![8.0, 8.0]];
    let log = run_session(&mut Scripted::new("s", script), &inputs, &config).unwrap();
    let params = QoeParams::default();
    let mut report =
        dynamic_regret(&log, &params, &config.ladder, config.mode, OptimumMethod::Exhaustive).unwrap();
    report.optima = vec![vec![8.0, 5.0], vec![8.0, 1.0], vec![8.0, 1.0], vec![1.0, 1.0]];
    let stats = condition_stats(&log, &report, &params, &[5.0, 5.0]).unwrap();
    assert_eq!(stats.v_empty, 0);
    // 3 + 4 + 0 + 7
    assert!((stats.v_r - 14.0).abs() < 1e-12);
}

#[test]
fn clairvoyant_play_has_zero_regret() {
    let omega = vec![vec![0.8, 0.2], vec![0.1, 0.9], vec![0.5, 0.5], vec![1.0, 0.0], vec![0.0, 0.3]];
    let (inputs, config) = constant_setup(7.0, omega.clone(), 2.0, &LADDER);
    let params = QoeParams::default();
    let mut script: Vec<Vec<f64>> = Vec::new();
    for i in 1..=omega.len() {
        let mut trial = script.clone();
        trial.resize(omega.len(), vec![1.0, 1.0]);
        let log = run_session(&mut Scripted::new("c", trial), &inputs, &config).unwrap();
        let opt = per_segment_optimum(&log.context(i), &params, &config.ladder, config.mode, OptimumMethod::Exhaustive)
            .unwrap();
        script.push(opt.decision);
    }
    let log = run_session(&mut Scripted::new("c", script), &inputs, &config).unwrap();
    let report = dynamic_regret(&log, &params, &config.ladder, config.mode, OptimumMethod::Exhaustive).unwrap();
    assert_eq!(report.total, 0.0);
}

#[test]
fn constant_play_regret_grows_linearly() {
    let segments = 40;
    let (inputs, config) = constant_setup(12.0, vec![vec![0.6, 0.4]; segments], 2.0, &LADDER);
    let params = QoeParams::default();
    let played = vec![2.5, 2.5];
    let log = run_session(&mut Constant::new("c", played.clone()), &inputs, &config).unwrap();
    let report = dynamic_regret(&log, &params, &config.ladder, config.mode, OptimumMethod::Exhaustive).unwrap();
    let ctx = log.context(1);
    let gap = exhaustive_max(&ctx, &params, &LADDER) - per_segment_qoe(&played, &ctx, &params).unwrap();
    assert!(gap > 0.0);
    for (i, reg) in report.prefix.iter().enumerate() {
        assert!((reg - (i + 1) as f64 * gap).abs() < 1e-9, "{i}: {reg}");
    }
}

fn zero_stats() -> ConditionStats {
    ConditionStats {
        v_empty: 0,
        v_r: 0.0,
        j: vec![],
        j_dagger: vec![],
        h: vec![],
    }
}

fn consts(alpha: f64) -> BoundConstants {
    BoundConstants {
        radius: 2f64.sqrt() * 39.0,
        q_bar: 3.7,
        tiles: 2,
        r_max: 40.0,
        d_min: 4.0,
        alpha,
    }
}

#[test]
fn bound_without_drift_or_tail() {
    let c = consts(0.5);
    let want = c.radius * c.radius / (2.0 * 0.5) + 0.5 * c.q_bar * c.q_bar * 100.0 / 2.0;
    assert!((regret_bound(&zero_stats(), &c, 100, false) - want).abs() < 1e-9);
    let lag = 2.0 * 40.0 / 4.0;
    let tail = lag * (3.0 * c.radius * c.radius / (2.0 * 0.5) + 0.5 * c.q_bar * c.q_bar / 2.0);
    assert!((regret_bound(&zero_stats(), &c, 100, true) - want - tail).abs() < 1e-9);
}

#[test]
fn doubling_the_step_rescales_terms() {
    let stats = ConditionStats {
        v_empty: 3,
        v_r: 17.0,
        ..zero_stats()
    };
    let (a, b) = (consts(0.7), consts(1.4));
    let inv = |c: &BoundConstants| {
        c.radius * c.radius * 4.0 / (2.0 * c.alpha) + c.radius * 17.0 / c.alpha
    };
    let lin = |c: &BoundConstants| c.alpha * c.q_bar * c.q_bar * 50.0 / 2.0;
    assert!((inv(&b) - inv(&a) / 2.0).abs() < 1e-9);
    assert!((lin(&b) - 2.0 * lin(&a)).abs() < 1e-9);
    assert!((regret_bound(&stats, &b, 50, false) - inv(&b) - lin(&b)).abs() < 1e-9);
}

#[test]
fn horizon_schedule_makes_average_bound_vanish() {
    let stats = ConditionStats {
        v_empty: 5,
        v_r: 80.0,
        ..zero_stats()
    };
    let mut prev = f64::INFINITY;
    let mut first = None;
    for e in 2..=6 {
        let i = 10usize.pow(e);
        let alpha = 26.0 * (i as f64).powf(-0.5);
        let avg = regret_bound(&stats, &consts(alpha), i, false) / i as f64;
        assert!(avg < prev);
        prev = avg;
        first.get_or_insert(avg);
    }
    assert!(prev < 0.011 * first.unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exhaustive_optimum_dominates_every_point(
        ctx in (1usize..=3).prop_flat_map(random_context), params in random_params(),
    ) {
        let tiles = ctx.tiles();
        let opt = per_segment_optimum(&ctx, &params, &ladder(), DecisionMode::Discrete, OptimumMethod::Exhaustive)
            .unwrap();
        prop_assert_eq!(opt.value, per_segment_qoe(&opt.decision, &ctx, &params).unwrap());
        for r in grid_points(&LADDER, tiles) {
            prop_assert!(opt.value >= per_segment_qoe(&r, &ctx, &params).unwrap());
        }
    }

    #[test]
    fn pg_round_matches_exhaustive(ctx in (1usize..=3).prop_flat_map(random_context), params in random_params()) {
        let exact = exhaustive_max(&ctx, &params, &LADDER);
        let got = per_segment_optimum(&ctx, &params, &ladder(), DecisionMode::Discrete, OptimumMethod::PgRound)
            .unwrap();
        prop_assert!(got.value <= exact);
        prop_assert!(exact - got.value <= 1e-6 * exact.abs().max(1.0), "{} vs {}", got.value, exact);
    }

    #[test]
    fn hull_optimum_brackets_a_fine_grid(ctx in (1usize..=2).prop_flat_map(random_context), params in random_params()) {
        let l = ladder();
        let got = per_segment_optimum(&ctx, &params, &l, DecisionMode::Convex, OptimumMethod::Hull).unwrap();
        prop_assert!(got.decision.iter().all(|&x| (l.min()..=l.max()).contains(&x)));
        prop_assert!((per_segment_qoe(&got.decision, &ctx, &params).unwrap() - got.value).abs() <= 1e-9);
        let n = 281;
        let h = (l.max() - l.min()) / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|j| l.min() + j as f64 * h).collect();
        let grid_best = exhaustive_max(&ctx, &params, &axis);
        let slope = params.utility.derivative(0.0) + params.inter + params.intra * 2.0 + params.rebuffer / ctx.dbar;
        let slack = ctx.tiles() as f64 * slope * h / 2.0;
        prop_assert!(got.value >= grid_best - 1e-9, "{} < {}", got.value, grid_best);
        prop_assert!(got.value <= grid_best + slack + 1e-9, "{} > {} + {}", got.value, grid_best, slack);
    }

    #[test]
    fn regret_summands_are_nonnegative(s in random_session(), params in random_params()) {
        let (_, config, log) = s.run();
        let report = dynamic_regret(&log, &params, &config.ladder, config.mode, OptimumMethod::Exhaustive).unwrap();
        for (best, actual) in report.optimal_values.iter().zip(&report.actual_values) {
            prop_assert!(best >= actual);
        }
        let summed: f64 = report.optimal_values.iter().zip(&report.actual_values).map(|(b, a)| b - a).sum();
        prop_assert!((report.total - summed).abs() <= 1e-9 * summed.abs().max(1.0));
        let stats = condition_stats(&log, &report, &params, &log.decisions[0]).unwrap();
        prop_assert!(stats.v_r >= 0.0);
    }
}

/// Tiny random instances for the offline search: at most 2 tiles, 3
/// segments and 3 levels.
fn tiny_session() -> impl Strategy<Value = RandomSession> {
    random_session().prop_map(|mut s| {
        s.omega.truncate(3);
        s.levels.truncate(3);
        for row in s.omega.iter_mut() {
            row.truncate(2);
        }
        for row in s.levels.iter_mut() {
            row.truncate(2);
            for l in row.iter_mut() {
                *l %= 3;
            }
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn offline_equals_brute_force(s in tiny_session(), params in random_params()) {
        let (inputs, mut config) = s.setup();
        config.ladder = BitrateLadder::new(LADDER[..3].to_vec()).unwrap();
        let opt = offline_optimal(&inputs, &config, &params).unwrap();
        let tiles = inputs.omega.tiles();
        let points = grid_points(&LADDER[..3], tiles);
        let count = s.omega.len();
        let mut best = f64::NEG_INFINITY;
        for code in 0..points.len().pow(count as u32) {
            let mut c = code;
            let script: Vec<Vec<f64>> = (0..count)
                .map(|_| {
                    let p = points[c % points.len()].clone();
                    c /= points.len();
                    p
                })
                .collect();
            let log = run_session(&mut Scripted::new("b", script), &inputs, &config).unwrap();
            best = best.max(log.qoe(&params).unwrap().total);
        }
        prop_assert!((opt.qoe.total - best).abs() <= 1e-9 * best.abs().max(1.0), "{} vs {}", opt.qoe.total, best);
        let replay = run_session(&mut Scripted::new("r", opt.decisions.clone()), &inputs, &config).unwrap();
        prop_assert_eq!(replay.qoe(&params).unwrap().total, opt.qoe.total);
        let played = run_session(&mut Scripted::new("p", s.decisions()), &inputs, &config).unwrap();
        prop_assert!(played.qoe(&params).unwrap().total <= opt.qoe.total + 1e-9);
    }

    #[test]
    fn offline_is_monotone_in_the_ladder(s in tiny_session(), params in random_params()) {
        let (inputs, mut config) = s.setup();
        config.ladder = BitrateLadder::new(vec![1.0, 5.0]).unwrap();
        let small = offline_optimal(&inputs, &config, &params).unwrap().qoe.total;
        config.ladder = BitrateLadder::new(vec![1.0, 2.5, 5.0]).unwrap();
        let large = offline_optimal(&inputs, &config, &params).unwrap().qoe.total;
        prop_assert!(large >= small - 1e-9);
    }
}

#[test]
fn log_utility_single_segment_regret_is_nonnegative() {
    let (inputs, config) = constant_setup(10.0, vec![vec![0.9, 0.1]], 2.0, &LADDER);
    let params = QoeParams::new(0.5, 0.1, 0.1, Utility::Log { scale: 10.0 }).unwrap();
    let log = run_session(&mut Constant::new("c", vec![1.0, 8.0]), &inputs, &config).unwrap();
    let report = dynamic_regret(&log, &params, &config.ladder, config.mode, OptimumMethod::Auto).unwrap();
    assert!(report.total > 0.0);
    assert_eq!(report.prefix.len(), 1);
}
