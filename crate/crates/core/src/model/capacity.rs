use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// What happens when a download runs past the end of a capacity trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exhaustion {
    /// Replay the trace cyclically.
    #[default]
    Wrap,
    /// Hold the last sample forever.
    Hold,
    /// Fail with [`Error::HorizonExceeded`].
    Error,
}

impl std::str::FromStr for Exhaustion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wrap" => Ok(Exhaustion::Wrap),
            "hold" => Ok(Exhaustion::Hold),
            "error" => Ok(Exhaustion::Error),
            other => Err(Error::Config(format!(
                "unknown trace exhaustion `{other}` (expected wrap, hold or error)"
            ))),
        }
    }
}

/// Piecewise-constant downloading capacity (zero-order hold between samples).
///
/// Sample `j` holds on `[t_j, t_{j+1})`; the last sample holds until the
/// horizon, which defaults to one sampling interval past the last sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityTrace {
    times: Vec<f64>,
    rates: Vec<f64>,
    horizon: f64,
    d_min: f64,
    d_max: f64,
}

impl CapacityTrace {
    /// Builds a trace whose bounds are the extreme samples.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        let lo = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        Self::with_bounds(samples, lo, hi)
    }

    pub fn with_bounds(samples: &[(f64, f64)], d_min: f64, d_max: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Validation("capacity trace is empty".into()));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::Validation(format!(
                "capacity trace must start at t=0, starts at {}",
                samples[0].0
            )));
        }
        if !(d_min > 0.0 && d_min <= d_max && d_max.is_finite()) {
            return Err(Error::Validation(format!(
                "capacity bounds [{d_min}, {d_max}] must satisfy 0 < d_min <= d_max"
            )));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Validation(format!(
                    "capacity timestamps must strictly increase ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(t, d)) = samples.iter().find(|s| !(s.1 >= d_min && s.1 <= d_max)) {
            return Err(Error::Validation(format!(
                "capacity {d} Mbps at t={t} outside [{d_min}, {d_max}]"
            )));
        }
        let n = samples.len();
        let step = if n > 1 {
            samples[n - 1].0 - samples[n - 2].0
        } else {
            1.0
        };
        Ok(CapacityTrace {
            times: samples.iter().map(|s| s.0).collect(),
            rates: samples.iter().map(|s| s.1).collect(),
            horizon: samples[n - 1].0 + step,
            d_min,
            d_max,
        })
    }

    /// A single-rate trace over a one-second horizon.
    pub fn constant(rate: f64) -> Result<Self> {
        Self::from_samples(&[(0.0, rate)])
    }

    /// Overrides the horizon; it must lie past the last sample.
    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        let last = *self.times.last().expect("nonempty");
        if !(horizon > last && horizon.is_finite()) {
            return Err(Error::invalid(format!(
                "horizon {horizon} must exceed the last sample time {last}"
            )));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.rates.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    fn piece_at(&self, local: f64) -> usize {
        self.times.partition_point(|&t| t <= local).saturating_sub(1)
    }

    /// Capacity in effect at time `t` under `policy`.
    pub fn rate_at(&self, t: f64, policy: Exhaustion) -> Option<f64> {
        if t < self.horizon {
            return Some(self.rates[self.piece_at(t.max(0.0))]);
        }
        match policy {
            Exhaustion::Wrap => Some(self.rates[self.piece_at(t.rem_euclid(self.horizon))]),
            Exhaustion::Hold => self.rates.last().copied(),
            Exhaustion::Error => None,
        }
    }

    /// Constant-rate pieces `(start, end, rate)` from `t0` onwards, in absolute
    /// time. Under [`Exhaustion::Hold`] the last piece is unbounded; under
    /// [`Exhaustion::Error`] the iterator stops at the horizon.
    fn pieces_from(&self, t0: f64, policy: Exhaustion) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.times.len();
        let (mut cycle, mut idx, mut held) = if t0 < self.horizon {
            (0.0, self.piece_at(t0), false)
        } else {
            match policy {
                Exhaustion::Wrap => {
                    let c = (t0 / self.horizon).floor();
                    (c * self.horizon, self.piece_at(t0 - c * self.horizon), false)
                }
                Exhaustion::Hold => (0.0, n, true),
                Exhaustion::Error => (0.0, n, false),
            }
        };
        let mut first = true;
        std::iter::from_fn(move || {
            let piece = if held {
                Some((self.horizon, f64::INFINITY, self.rates[n - 1]))
            } else if idx < n {
                let end = if idx + 1 < n { self.times[idx + 1] } else { self.horizon };
                let p = (cycle + self.times[idx], cycle + end, self.rates[idx]);
                idx += 1;
                if idx == n {
                    match policy {
                        Exhaustion::Wrap => {
                            idx = 0;
                            cycle += self.horizon;
                        }
                        Exhaustion::Hold => held = true,
                        Exhaustion::Error => {}
                    }
                }
                Some(p)
            } else {
                None
            };
            piece.map(|(s, e, r)| {
                let s = if first { t0.max(s) } else { s };
                first = false;
                (s, e, r)
            })
        })
    }

    /// Smallest `t >= t0` such that the capacity integrated over `[t0, t]`
    /// equals `bits` megabits.
    pub fn integrate(&self, t0: f64, bits: f64, policy: Exhaustion) -> Result<f64> {
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(Error::invalid(format!("start time {t0} must be finite and >= 0")));
        }
        if !(bits >= 0.0 && bits.is_finite()) {
            return Err(Error::invalid(format!("download size {bits} must be finite and >= 0")));
        }
        if bits == 0.0 {
            return Ok(t0);
        }
        let mut remaining = bits;
        let mut at = t0;
        for (start, end, rate) in self.pieces_from(t0, policy) {
            let avail = rate * (end - start);
            if avail >= remaining {
                return Ok(start + remaining / rate);
            }
            remaining -= avail;
            at = end;
        }
        Err(Error::HorizonExceeded { at, remaining })
    }

    /// Megabits deliverable over `[t0, t1]`.
    pub fn delivered(&self, t0: f64, t1: f64, policy: Exhaustion) -> Result<f64> {
        let mut total = 0.0;
        if t1 <= t0 {
            return Ok(0.0);
        }
        for (start, end, rate) in self.pieces_from(t0, policy) {
            if start >= t1 {
                return Ok(total);
            }
            total += rate * (end.min(t1) - start);
            if end >= t1 {
                return Ok(total);
            }
        }
        Err(Error::HorizonExceeded {
            at: self.horizon,
            remaining: 0.0,
        })
    }
}
