#![allow(dead_code)]

use proptest::prelude::*;
use vastream::model::{
    BitrateLadder, CapacityTrace, DecisionMode, Exhaustion, OverlapMap, VideoConfig,
};
use vastream::policy::Scripted;
use vastream::qoe::{QoeParams, SegmentContext, Utility};
use vastream::sim::{run_session, Reveal, SessionInputs, SessionLog, SimConfig};

pub const LADDER: [f64; 4] = [1.0, 2.5, 5.0, 8.0];

/// A randomly drawn session: capacity samples, overlaps, ladder-level
/// indices per tile and the initial buffer.
#[derive(Debug, Clone)]
pub struct RandomSession {
    pub capacity: Vec<(f64, f64)>,
    pub omega: Vec<Vec<f64>>,
    pub levels: Vec<Vec<usize>>,
    pub initial_buffer: f64,
    pub reveal: Reveal,
}

impl RandomSession {
    pub fn decisions(&self) -> Vec<Vec<f64>> {
        self.levels
            .iter()
            .map(|row| row.iter().map(|&l| LADDER[l]).collect())
            .collect()
    }

    pub fn setup(&self) -> (SessionInputs, SimConfig) {
        let inputs = SessionInputs {
            capacity: CapacityTrace::from_samples(&self.capacity).unwrap(),
            omega: OverlapMap::new(self.omega.clone()).unwrap(),
        };
        let config = SimConfig {
            video: VideoConfig::new(self.omega.len(), 1.0, self.initial_buffer).unwrap(),
            ladder: BitrateLadder::new(LADDER.to_vec()).unwrap(),
            mode: DecisionMode::Discrete,
            exhaustion: Exhaustion::Wrap,
            reveal: self.reveal,
        };
        (inputs, config)
    }

    pub fn run(&self) -> (SessionInputs, SimConfig, SessionLog) {
        let (inputs, config) = self.setup();
        let log = run_session(&mut Scripted::new("scripted", self.decisions()), &inputs, &config)
            .unwrap();
        (inputs, config, log)
    }
}

pub fn random_session() -> impl Strategy<Value = RandomSession> {
    (1usize..4, 1usize..9, 1usize..7).prop_flat_map(|(tiles, segments, pieces)| {
        (
            prop::collection::vec(1.0f64..30.0, pieces),
            prop::collection::vec(prop::collection::vec(0.0f64..=1.0, tiles), segments),
            prop::collection::vec(prop::collection::vec(0usize..LADDER.len(), tiles), segments),
            0.0f64..4.0,
            prop_oneof![Just(Reveal::Playback), Just(Reveal::Download)],
        )
            .prop_map(|(rates, omega, levels, initial_buffer, reveal)| RandomSession {
                capacity: rates
                    .iter()
                    .enumerate()
                    .map(|(j, &r)| (j as f64 * 0.7, r))
                    .collect(),
                omega,
                levels,
                initial_buffer,
                reveal,
            })
    })
}

pub fn random_params() -> impl Strategy<Value = QoeParams> {
    (
        0.0f64..2.0,
        0.0f64..0.5,
        0.0f64..0.5,
        prop_oneof![Just(Utility::Linear), (1.0f64..50.0).prop_map(|scale| Utility::Log { scale })],
    )
        .prop_map(|(rb, e, a, u)| QoeParams::new(rb, e, a, u).unwrap())
}

pub fn random_context(tiles: usize) -> impl Strategy<Value = SegmentContext> {
    (
        prop::collection::vec(0.0f64..=1.0, tiles),
        0.0f64..40.0,
        0.0f64..4.0,
        1.0f64..60.0,
    )
        .prop_map(|(omega, prev_mu, buffer_before, dbar)| SegmentContext {
            omega,
            prev_mu,
            buffer_before,
            dbar,
            beta: 1.0,
        })
}

/// Every point of `levels^tiles`, in odometer order.
pub fn grid_points(levels: &[f64], tiles: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..tiles {
        out = out
            .into_iter()
            .flat_map(|p| {
                levels.iter().map(move |&r| {
                    let mut q = p.clone();
                    q.push(r);
                    q
                })
            })
            .collect();
    }
    out
}
