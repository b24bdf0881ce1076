//! Quality-of-experience model.
//!
//! Session QoE is viewing utility minus three losses: rebuffering time,
//! drops in viewing bitrate between consecutive segments, and bitrate spread
//! among the tiles a user actually looks at. [`per_segment_qoe`] is the
//! relaxed single-segment objective the online learner and the regret
//! oracles work with: it approximates download time with the segment's
//! average capacity and drops the `[.]^+` on the rebuffering and
//! inter-segment terms, which makes it concave on the bitrate box.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nondecreasing concave viewing utility of the viewing bitrate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Utility {
    #[default]
    Linear,
    /// `scale * ln(1 + mu)`.
    Log { scale: f64 },
}

impl Utility {
    pub fn value(&self, mu: f64) -> Result<f64> {
        if !(mu >= 0.0) {
            return Err(Error::invalid(format!("viewing bitrate {mu} is negative")));
        }
        Ok(match *self {
            Utility::Linear => mu,
            Utility::Log { scale } => scale * mu.ln_1p(),
        })
    }

    /// Derivative at `mu >= 0`.
    pub fn derivative(&self, mu: f64) -> f64 {
        match *self {
            Utility::Linear => 1.0,
            Utility::Log { scale } => scale / (1.0 + mu.max(0.0)),
        }
    }
}

/// Loss coefficients and utility shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoeParams {
    /// Loss per second of rebuffering.
    pub rebuffer: f64,
    /// Loss per Mbps drop in viewing bitrate between segments.
    pub inter: f64,
    /// Loss per Mbps of a viewed tile's shortfall below the viewed mean.
    pub intra: f64,
    pub utility: Utility,
}

impl Default for QoeParams {
    fn default() -> Self {
        QoeParams {
            rebuffer: 0.5,
            inter: 0.1,
            intra: 0.1,
            utility: Utility::Linear,
        }
    }
}

impl QoeParams {
    pub fn new(rebuffer: f64, inter: f64, intra: f64, utility: Utility) -> Result<Self> {
        let ok = |x: f64| x >= 0.0 && x.is_finite();
        if !(ok(rebuffer) && ok(inter) && ok(intra)) {
            return Err(Error::invalid("loss coefficients must be finite and >= 0"));
        }
        if let Utility::Log { scale } = utility {
            if !ok(scale) {
                return Err(Error::invalid("log utility scale must be finite and >= 0"));
            }
        }
        Ok(QoeParams {
            rebuffer,
            inter,
            intra,
            utility,
        })
    }
}

fn check_len(omega: &[f64], r: &[f64]) -> Result<()> {
    if omega.len() != r.len() {
        return Err(Error::invalid(format!(
            "overlap has {} tiles but decision has {}",
            omega.len(),
            r.len()
        )));
    }
    Ok(())
}

/// Overlap-weighted sum of tile bitrates.
pub fn viewing_bitrate(omega: &[f64], r: &[f64]) -> Result<f64> {
    check_len(omega, r)?;
    Ok(omega.iter().zip(r).map(|(w, x)| w * x).sum())
}

pub fn utility(mu: f64, params: &QoeParams) -> Result<f64> {
    params.utility.value(mu)
}

/// `l_rb * sum_i [duration_i - buffer_before_i]^+`.
pub fn rebuffer_loss(durations: &[f64], buffers_before: &[f64], params: &QoeParams) -> Result<f64> {
    if durations.len() != buffers_before.len() {
        return Err(Error::invalid("durations and buffers differ in length"));
    }
    let stall: f64 = durations
        .iter()
        .zip(buffers_before)
        .map(|(d, b)| (d - b).max(0.0))
        .sum();
    Ok(params.rebuffer * stall)
}

/// `l_bd_e * sum_{i>=2} [mu_{i-1} - mu_i]^+`.
pub fn inter_degradation_loss(mus: &[f64], params: &QoeParams) -> f64 {
    params.inter * mus.windows(2).map(|w| (w[0] - w[1]).max(0.0)).sum::<f64>()
}

/// Unweighted intra-segment shortfall `sum_k omega_k [mu/sum(omega) - r_k]^+`,
/// defined as zero when nothing is in view.
fn intra_shortfall(omega: &[f64], r: &[f64]) -> f64 {
    let total: f64 = omega.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean = omega.iter().zip(r).map(|(w, x)| w * x).sum::<f64>() / total;
    omega
        .iter()
        .zip(r)
        .map(|(w, x)| w * (mean - x).max(0.0))
        .sum()
}

/// `l_bd_a * sum_k omega_k [mu/sum(omega) - r_k]^+` for one segment.
pub fn intra_degradation_loss(omega: &[f64], r: &[f64], params: &QoeParams) -> Result<f64> {
    check_len(omega, r)?;
    Ok(params.intra * intra_shortfall(omega, r))
}

/// What one played segment contributes to session QoE.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutcome<'a> {
    pub omega: &'a [f64],
    pub bitrates: &'a [f64],
    pub download_duration: f64,
    pub buffer_before: f64,
}

/// Session QoE split into its components; `total` is
/// `utility - rebuffer - inter - intra`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QoeBreakdown {
    pub utility: f64,
    pub rebuffer: f64,
    pub inter: f64,
    pub intra: f64,
    pub total: f64,
}

/// Session QoE from per-segment outcomes.
pub fn total_qoe(segments: &[SegmentOutcome<'_>], params: &QoeParams) -> Result<QoeBreakdown> {
    let mut mus = Vec::with_capacity(segments.len());
    let mut util = 0.0;
    let mut intra = 0.0;
    for s in segments {
        let mu = viewing_bitrate(s.omega, s.bitrates)?;
        util += utility(mu, params)?;
        intra += intra_degradation_loss(s.omega, s.bitrates, params)?;
        mus.push(mu);
    }
    let durations: Vec<f64> = segments.iter().map(|s| s.download_duration).collect();
    let buffers: Vec<f64> = segments.iter().map(|s| s.buffer_before).collect();
    let rebuffer = rebuffer_loss(&durations, &buffers, params)?;
    let inter = inter_degradation_loss(&mus, params);
    Ok(QoeBreakdown {
        utility: util,
        rebuffer,
        inter,
        intra,
        total: util - rebuffer - (inter + intra),
    })
}

/// What is known about a segment once it has been downloaded and viewed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentContext {
    /// Realized overlap fractions.
    pub omega: Vec<f64>,
    /// Viewing bitrate of the previous segment (0 before the first).
    pub prev_mu: f64,
    /// Buffer occupancy, seconds, when the segment's download began.
    pub buffer_before: f64,
    /// Average capacity over the segment's download, Mbps.
    pub dbar: f64,
    /// Segment length, seconds.
    pub beta: f64,
}

impl SegmentContext {
    fn check(&self, r: &[f64]) -> Result<()> {
        if !(self.dbar > 0.0 && self.dbar.is_finite()) {
            return Err(Error::invalid(format!(
                "average capacity {} must be positive",
                self.dbar
            )));
        }
        if !(self.beta > 0.0) {
            return Err(Error::invalid("segment length must be positive"));
        }
        check_len(&self.omega, r)
    }

    pub fn tiles(&self) -> usize {
        self.omega.len()
    }
}

/// Relaxed single-segment QoE of decision `r` in context `ctx`:
///
/// `u(mu(r)) - l_rb (sum_k r_k beta / dbar - b) - l_bd_a shortfall(r) - l_bd_e (mu_prev - mu(r))`.
///
/// Neither the rebuffering nor the inter-segment term is clamped at zero.
pub fn per_segment_qoe(r: &[f64], ctx: &SegmentContext, params: &QoeParams) -> Result<f64> {
    ctx.check(r)?;
    let mu = viewing_bitrate(&ctx.omega, r)?;
    let download = r.iter().sum::<f64>() * ctx.beta / ctx.dbar;
    Ok(params.utility.value(mu)?
        - params.rebuffer * (download - ctx.buffer_before)
        - params.intra * intra_shortfall(&ctx.omega, r)
        - params.inter * (ctx.prev_mu - mu))
}

/// A supergradient of [`per_segment_qoe`] at `r`. Kinks of `[.]^+` take the
/// zero-slope branch.
pub fn per_segment_subgradient(
    r: &[f64],
    ctx: &SegmentContext,
    params: &QoeParams,
) -> Result<Vec<f64>> {
    ctx.check(r)?;
    let omega = &ctx.omega;
    let mu = viewing_bitrate(omega, r)?;
    let u_prime = params.utility.derivative(mu);
    let time_cost = params.rebuffer * ctx.beta / ctx.dbar;
    let total: f64 = omega.iter().sum();

    // Tiles strictly below the viewed mean drive the shortfall term.
    let (active_weight, active): (f64, Vec<bool>) = if total > 0.0 {
        let mean = mu / total;
        let active: Vec<bool> = r.iter().map(|&x| mean - x > 0.0).collect();
        let w = omega
            .iter()
            .zip(&active)
            .filter(|(_, &a)| a)
            .map(|(w, _)| w)
            .sum();
        (w, active)
    } else {
        (0.0, vec![false; r.len()])
    };

    Ok(omega
        .iter()
        .zip(&active)
        .map(|(&w, &a)| {
            let shortfall = if total > 0.0 {
                w * active_weight / total - if a { w } else { 0.0 }
            } else {
                0.0
            };
            u_prime * w - time_cost + params.inter * w - params.intra * shortfall
        })
        .collect())
}
