//! Seeded synthetic traces standing in for measured datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{CapacityTrace, FovExtent, Viewport, ViewportTrace};
use crate::{Error, Result};

/// Capacity as a bounded random walk sampled once per second, plus a linear
/// ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitySpec {
    /// Starting capacity, Mbps.
    pub base: f64,
    /// Largest change of the walk between adjacent seconds, Mbps.
    pub step: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Mbps added per second of trace time.
    pub ramp: f64,
    /// Number of one-second samples.
    pub seconds: usize,
}

/// The reference viewport wanders as a random walk; the user looks at the
/// reference plus a fixed preference offset plus a mean-reverting jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewportSpec {
    /// Initial reference direction, degrees.
    pub start_pitch: f64,
    pub start_yaw: f64,
    /// Largest per-segment change of the reference pitch and yaw, degrees.
    pub pitch_step: f64,
    pub yaw_step: f64,
    pub preference_pitch: f64,
    pub preference_yaw: f64,
    /// Largest per-segment kick to the user's jitter, degrees.
    pub jitter_step: f64,
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTraces {
    pub capacity: CapacityTrace,
    pub user: ViewportTrace,
    pub reference: ViewportTrace,
}

fn uniform(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.gen_range(-half_width..=half_width)
    } else {
        0.0
    }
}

fn wrap_yaw(y: f64) -> f64 {
    (y + 180.0).rem_euclid(360.0) - 180.0
}

pub fn generate_capacity(spec: &CapacitySpec, rng: &mut ChaCha8Rng) -> Result<CapacityTrace> {
    if !(spec.d_min > 0.0 && spec.d_min <= spec.d_max) {
        return Err(Error::Config(format!(
            "capacity bounds [{}, {}] must satisfy 0 < min <= max",
            spec.d_min, spec.d_max
        )));
    }
    if !(spec.step >= 0.0) || spec.seconds == 0 {
        return Err(Error::Config("capacity walk needs step >= 0 and at least one second".into()));
    }
    let mut walk = spec.base.clamp(spec.d_min, spec.d_max);
    let mut samples = Vec::with_capacity(spec.seconds);
    for t in 0..spec.seconds {
        if t > 0 {
            walk = (walk + uniform(rng, spec.step)).clamp(spec.d_min, spec.d_max);
        }
        let rate = (walk + spec.ramp * t as f64).clamp(spec.d_min, spec.d_max);
        samples.push((t as f64, rate));
    }
    CapacityTrace::with_bounds(&samples, spec.d_min, spec.d_max)
}

pub fn generate_viewports(
    spec: &ViewportSpec,
    extent: FovExtent,
    rng: &mut ChaCha8Rng,
) -> Result<(ViewportTrace, ViewportTrace)> {
    if spec.segments == 0 {
        return Err(Error::Config("viewport trace needs at least one segment".into()));
    }
    let mut pitch = spec.start_pitch.clamp(-90.0, 90.0);
    let mut yaw = wrap_yaw(spec.start_yaw);
    let (mut jp, mut jy) = (0.0f64, 0.0f64);
    let mut user = Vec::with_capacity(spec.segments);
    let mut reference = Vec::with_capacity(spec.segments);
    for i in 0..spec.segments {
        if i > 0 {
            pitch = (pitch + uniform(rng, spec.pitch_step)).clamp(-90.0, 90.0);
            yaw = wrap_yaw(yaw + uniform(rng, spec.yaw_step));
            jp = 0.5 * jp + uniform(rng, spec.jitter_step);
            jy = 0.5 * jy + uniform(rng, spec.jitter_step);
        }
        reference.push(Viewport::new(pitch, yaw)?);
        let up = (pitch + spec.preference_pitch + jp).clamp(-90.0, 90.0);
        let uy = wrap_yaw(yaw + spec.preference_yaw + jy);
        user.push(Viewport::new(up, uy)?);
    }
    Ok((
        ViewportTrace::new(user, extent)?,
        ViewportTrace::new(reference, extent)?,
    ))
}

/// Capacity and viewport traces drawn from one seeded generator, capacity
/// first.
pub fn generate_synthetic(
    capacity: &CapacitySpec,
    viewport: &ViewportSpec,
    extent: FovExtent,
    seed: u64,
) -> Result<SyntheticTraces> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let capacity = generate_capacity(capacity, &mut rng)?;
    let (user, reference) = generate_viewports(viewport, extent, &mut rng)?;
    Ok(SyntheticTraces {
        capacity,
        user,
        reference,
    })
}
