use crate::model::BitrateLadder;
use crate::sim::{DecisionInput, Policy};
use crate::{Error, Result};

/// Same decision for every segment.
#[derive(Debug, Clone)]
pub struct Constant {
    name: String,
    decision: Vec<f64>,
}

impl Constant {
    pub fn new(name: &str, decision: Vec<f64>) -> Self {
        Constant {
            name: name.to_string(),
            decision,
        }
    }
}

impl Policy for Constant {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn decide(&mut self, _: &DecisionInput<'_>) -> Result<Vec<f64>> {
        Ok(self.decision.clone())
    }
}

/// Highest uniform level the last measured throughput could sustain in
/// real time; the lowest level when nothing has been measured yet or no
/// level fits.
#[derive(Debug, Clone)]
pub struct GreedyCapacity {
    ladder: BitrateLadder,
    tiles: usize,
}

impl GreedyCapacity {
    pub fn new(ladder: BitrateLadder, tiles: usize) -> Self {
        GreedyCapacity { ladder, tiles }
    }
}

impl Policy for GreedyCapacity {
    fn name(&self) -> String {
        "greedy-capacity".to_string()
    }

    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<Vec<f64>> {
        let k = self.tiles as f64;
        let rate = input
            .last_throughput
            .and_then(|d| self.ladder.levels().iter().rev().find(|&&r| k * r <= d))
            .copied()
            .unwrap_or(self.ladder.min());
        Ok(vec![rate; self.tiles])
    }
}

/// Replays a fixed decision sequence.
#[derive(Debug, Clone)]
pub struct Scripted {
    name: String,
    decisions: Vec<Vec<f64>>,
}

impl Scripted {
    pub fn new(name: &str, decisions: Vec<Vec<f64>>) -> Self {
        Scripted {
            name: name.to_string(),
            decisions,
        }
    }
}

impl Policy for Scripted {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn decide(&mut self, input: &DecisionInput<'_>) -> Result<Vec<f64>> {
        self.decisions
            .get(input.segment - 1)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("script has no decision for segment {}", input.segment)))
    }
}
