use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Whether tile bitrates are restricted to the ladder levels or may take any
/// value in the ladder's convex hull `[R_1, R_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionMode {
    #[default]
    Discrete,
    Convex,
}

impl std::str::FromStr for DecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(DecisionMode::Discrete),
            "convex" => Ok(DecisionMode::Convex),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected discrete or convex)"
            ))),
        }
    }
}

/// Strictly increasing set of encodable tile bitrates, in Mbps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BitrateLadder {
    levels: Vec<f64>,
}

impl BitrateLadder {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::invalid("a bitrate ladder needs at least two levels"));
        }
        if levels.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("ladder levels must be positive and finite"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("ladder levels must be strictly increasing"));
        }
        Ok(BitrateLadder { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bitrate of the zero-based level `idx`.
    pub fn level(&self, idx: usize) -> f64 {
        self.levels[idx]
    }

    pub fn min(&self) -> f64 {
        self.levels[0]
    }

    pub fn max(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    /// Zero-based index of the lower median level.
    pub fn median_level(&self) -> usize {
        (self.levels.len() - 1) / 2
    }

    /// Zero-based level of `rate` if it is exactly a ladder member.
    pub fn level_of(&self, rate: f64) -> Option<usize> {
        self.levels.iter().position(|&r| r == rate)
    }

    /// Level closest to `x`; ties go to the lower level.
    pub fn nearest_level(&self, x: f64) -> usize {
        let (lo, hi) = self.bracket(x);
        if (x - self.levels[lo]).abs() <= (self.levels[hi] - x).abs() {
            lo
        } else {
            hi
        }
    }

    /// Bitrate closest to `x`; ties go to the lower level.
    pub fn nearest(&self, x: f64) -> f64 {
        self.levels[self.nearest_level(x)]
    }

    /// Adjacent levels `(lo, hi)` with `R_lo <= x <= R_hi`, collapsing to the
    /// end level when `x` lies outside the ladder.
    pub fn bracket(&self, x: f64) -> (usize, usize) {
        let last = self.levels.len() - 1;
        let above = self.levels.partition_point(|&r| r < x);
        if above == 0 {
            (0, 0)
        } else if above > last {
            (last, last)
        } else if self.levels[above] == x {
            (above, above)
        } else {
            (above - 1, above)
        }
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min(), self.max())
    }

    /// Whether `x` is an admissible tile bitrate under `mode`.
    pub fn admits(&self, x: f64, mode: DecisionMode) -> bool {
        match mode {
            DecisionMode::Discrete => self.level_of(x).is_some(),
            DecisionMode::Convex => x >= self.min() && x <= self.max(),
        }
    }

    /// Per-tile diameter of the decision box: `sqrt(K) * (R_max - R_1)`.
    pub fn diameter(&self, tiles: usize) -> f64 {
        (tiles as f64).sqrt() * (self.max() - self.min())
    }
}

impl TryFrom<Vec<f64>> for BitrateLadder {
    type Error = Error;

    fn try_from(levels: Vec<f64>) -> Result<Self> {
        BitrateLadder::new(levels)
    }
}

impl From<BitrateLadder> for Vec<f64> {
    fn from(ladder: BitrateLadder) -> Self {
        ladder.levels
    }
}
