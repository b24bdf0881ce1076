mod common;

use common::{random_session, RandomSession, LADDER};
use proptest::prelude::*;
use vastream::model::{BitrateLadder, CapacityTrace, DecisionMode, Exhaustion, OverlapMap, VideoConfig};
use vastream::policy::{from_name, Obs360Options, PolicyContext, Scripted};
use vastream::qoe::QoeParams;
use vastream::sim::{run_session, Reveal, SessionInputs, SimConfig};

/// 10 Mbps for a second, 4 Mbps until t=3, then 20 Mbps.
fn hand_instance() -> (SessionInputs, SimConfig) {
    let inputs = SessionInputs {
        capacity: CapacityTrace::from_samples(&[(0.0, 10.0), (1.0, 4.0), (3.0, 20.0)])
            .unwrap()
            .with_horizon(100.0)
            .unwrap(),
        omega: OverlapMap::new(vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap(),
    };
    let config = SimConfig {
        video: VideoConfig::new(3, 1.0, 1.0).unwrap(),
        ladder: BitrateLadder::new(vec![1.0, 5.0, 8.0]).unwrap(),
        mode: DecisionMode::Discrete,
        exhaustion: Exhaustion::Error,
        reveal: Reveal::Playback,
    };
    (inputs, config)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn hand_computed_trace() {
    let (inputs, config) = hand_instance();
    let script = vec![vec![5.0, 5.0], vec![8.0, 8.0], vec![1.0, 1.0]];
    let log = run_session(&mut Scripted::new("s", script), &inputs, &config).unwrap();

    let tile_times: Vec<(f64, f64)> = log
        .downloads
        .iter()
        .flat_map(|d| d.tiles.iter().map(|t| (t.start, t.finish)))
        .collect();
    let expect = [(0.0, 0.5), (0.5, 1.0), (1.0, 3.0), (3.0, 3.4), (3.4, 3.45), (3.45, 3.5)];
    for (got, want) in tile_times.iter().zip(expect) {
        assert!(close(got.0, want.0) && close(got.1, want.1), "{got:?} vs {want:?}");
    }
    let buffers = log.buffers();
    for (got, want) in buffers.iter().zip([1.0, 1.0, 1.9]) {
        assert!(close(*got, want), "{buffers:?}");
    }
    let stalls: Vec<f64> = log.playback.iter().map(|p| p.rebuffer).collect();
    for (got, want) in stalls.iter().zip([0.0, 1.4, 0.0]) {
        assert!(close(*got, want), "{stalls:?}");
    }
    assert!(close(log.downloads[1].dbar, 16.0 / 2.4));
    assert_eq!(log.aux.sets, vec![vec![], vec![], vec![1], vec![2, 3]]);
}

#[test]
fn download_reveal_on_hand_instance() {
    let (inputs, config) = hand_instance();
    let config = SimConfig {
        reveal: Reveal::Download,
        ..config
    };
    let script = vec![vec![5.0, 5.0], vec![8.0, 8.0], vec![1.0, 1.0]];
    let log = run_session(&mut Scripted::new("s", script), &inputs, &config).unwrap();
    assert_eq!(log.aux.sets, vec![vec![], vec![1], vec![2], vec![3]]);
}

#[test]
fn every_policy_is_stall_free_on_a_fast_link() {
    let ladder = BitrateLadder::new(vec![1.0, 2.5, 5.0, 8.0, 16.0, 40.0]).unwrap();
    let tiles = 4;
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|i| (0..tiles).map(|k| ((i * 7 + k * 3) % 10) as f64 / 10.0).collect())
        .collect();
    let inputs = SessionInputs {
        capacity: CapacityTrace::from_samples(&[(0.0, 160.0), (1.0, 400.0), (2.0, 170.0)]).unwrap(),
        omega: OverlapMap::new(rows).unwrap(),
    };
    let config = SimConfig {
        video: VideoConfig::new(30, 1.0, 1.0).unwrap(),
        ladder: ladder.clone(),
        mode: DecisionMode::Discrete,
        exhaustion: Exhaustion::Wrap,
        reveal: Reveal::Playback,
    };
    let ctx = PolicyContext {
        ladder,
        mode: DecisionMode::Discrete,
        tiles,
        params: QoeParams::default(),
        obs360: Obs360Options::default(),
    };
    for name in ["obs360", "obs360-unlimited", "constant:max", "constant:min", "greedy-capacity"] {
        let mut policy = from_name(name, &ctx).unwrap();
        let log = run_session(&mut policy, &inputs, &config).unwrap();
        assert_eq!(log.total_rebuffer(), 0.0, "{name}");
    }
}

#[test]
fn sessions_are_deterministic() {
    let (inputs, config) = hand_instance();
    let script = vec![vec![5.0, 1.0], vec![8.0, 5.0], vec![1.0, 8.0]];
    let a = run_session(&mut Scripted::new("s", script.clone()), &inputs, &config).unwrap();
    let b = run_session(&mut Scripted::new("s", script), &inputs, &config).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

fn check_invariants(s: &RandomSession) -> Result<(), TestCaseError> {
    let (inputs, _, log) = s.run();
    let beta = log.segment_length;
    let mut clock = 0.0;
    let mut prev_buffer = s.initial_buffer;
    let mut eq7 = 0.0;
    for (i, d) in log.downloads.iter().enumerate() {
        prop_assert_eq!(d.start, clock);
        let mut t = clock;
        for (k, tile) in d.tiles.iter().enumerate() {
            prop_assert_eq!(tile.start, t);
            let got = inputs.capacity.delivered(tile.start, tile.finish, Exhaustion::Wrap).unwrap();
            prop_assert!((got - log.decisions[i][k] * beta).abs() <= 1e-9, "tile {k} of {i}: {got}");
            t = tile.finish;
        }
        prop_assert_eq!(d.finish, t);
        prop_assert!(d.buffer_after >= beta);
        prop_assert_eq!(d.buffer_before, prev_buffer);
        eq7 += (d.finish - d.start - prev_buffer).max(0.0);
        prev_buffer = d.buffer_after;
        clock = d.finish;
    }
    prop_assert!((log.total_rebuffer() - eq7).abs() <= 1e-9);

    let mut seen = vec![0usize; log.segments()];
    for batch in &log.aux.sets {
        for &j in batch {
            seen[j - 1] += 1;
        }
    }
    prop_assert!(seen.iter().all(|&c| c == 1), "{:?}", log.aux.sets);
    prop_assert_eq!(log.aux.sets.len(), log.segments() + 1);
    Ok(())
}

proptest! {
    #[test]
    fn session_invariants(s in random_session()) {
        check_invariants(&s)?;
    }

    #[test]
    fn decisions_are_recorded_verbatim(s in random_session()) {
        let (_, _, log) = s.run();
        prop_assert_eq!(&log.decisions, &s.decisions());
        for row in &log.decisions {
            prop_assert!(row.iter().all(|r| LADDER.contains(r)));
        }
    }
}
