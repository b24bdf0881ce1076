//! Run configuration, a flat TOML table.
//!
//! Every key is optional and defaults to the 2-tile demonstration setup.
//! Relative trace paths are resolved against the directory holding the
//! config file. When no capacity or viewport trace is given the synthetic
//! generator is used, which then requires `seed`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synthetic::{generate_capacity, generate_viewports, CapacitySpec, ViewportSpec};
use super::traces::{read_capacity, read_file, read_viewport};
use crate::model::{
    overlap_fractions, BitrateLadder, DecisionMode, Exhaustion, FovExtent, TileGrid, VideoConfig,
};
use crate::oracles::OptimumMethod;
use crate::policy::{Obs360Options, PolicyContext, StepSize};
use crate::qoe::{QoeParams, Utility};
use crate::sim::{Reveal, SessionInputs, SimConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub segments: usize,
    pub segment_length: f64,
    pub initial_buffer: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub ladder: Vec<f64>,
    pub mode: DecisionMode,
    pub reveal: Reveal,
    pub trace_exhaustion: Exhaustion,

    pub l_rb: f64,
    pub l_bd_e: f64,
    pub l_bd_a: f64,
    /// `linear` or `log`.
    pub utility: String,
    pub utility_scale: f64,

    pub policy: String,
    /// Policies run side by side by `compare`.
    pub policies: Vec<String>,
    pub alpha: f64,
    /// `fixed` uses `alpha`; `horizon` uses `alpha0 * segments^(-1/gamma)`.
    pub alpha_schedule: String,
    pub alpha0: f64,
    pub gamma: f64,
    pub rate_limit: bool,
    /// `median`, `min`, `max` or a 1-based level for every tile of the first
    /// decision.
    pub initial_level: String,
    pub optimum_method: OptimumMethod,

    pub capacity_trace: Option<PathBuf>,
    pub user_trace: Option<PathBuf>,
    pub reference_trace: Option<PathBuf>,
    /// FoV size in degrees; half the sphere for grids of up to two tiles, a
    /// quarter otherwise.
    pub fov_vertical: Option<f64>,
    pub fov_horizontal: Option<f64>,

    pub seed: Option<u64>,
    pub capacity_base: f64,
    pub capacity_step: f64,
    pub capacity_min: f64,
    pub capacity_max: f64,
    pub capacity_ramp: f64,
    /// Length of the synthetic capacity trace; twice the video length when
    /// unset.
    pub capacity_seconds: Option<usize>,
    /// Initial reference viewport, degrees.
    pub reference_pitch: f64,
    pub reference_yaw: f64,
    pub viewport_pitch_step: f64,
    pub viewport_yaw_step: f64,
    pub preference_pitch: f64,
    pub preference_yaw: f64,
    pub jitter_step: f64,

    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            segments: 60,
            segment_length: 1.0,
            initial_buffer: 2.0,
            grid_rows: 1,
            grid_cols: 2,
            ladder: vec![1.0, 2.5, 5.0, 8.0, 16.0, 40.0],
            mode: DecisionMode::Discrete,
            reveal: Reveal::Playback,
            trace_exhaustion: Exhaustion::Wrap,
            l_rb: 0.5,
            l_bd_e: 0.1,
            l_bd_a: 0.1,
            utility: "linear".into(),
            utility_scale: 1.0,
            policy: "obs360".into(),
            policies: Vec::new(),
            alpha: 1.0,
            alpha_schedule: "fixed".into(),
            alpha0: 1.0,
            gamma: 2.0,
            rate_limit: true,
            initial_level: "median".into(),
            optimum_method: OptimumMethod::Auto,
            capacity_trace: None,
            user_trace: None,
            reference_trace: None,
            fov_vertical: None,
            fov_horizontal: None,
            seed: None,
            capacity_base: 33.0,
            capacity_step: 15.0,
            capacity_min: 1.0,
            capacity_max: 80.0,
            capacity_ramp: 0.0,
            capacity_seconds: None,
            reference_pitch: 0.0,
            reference_yaw: -80.0,
            viewport_pitch_step: 0.0,
            viewport_yaw_step: 0.0,
            preference_pitch: 0.0,
            preference_yaw: 20.0,
            jitter_step: 15.0,
            output_dir: None,
        }
    }
}

/// A fully resolved experiment: environment, simulator settings and the
/// ingredients for building policies.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub sim: SimConfig,
    pub params: QoeParams,
    pub inputs: SessionInputs,
    pub policies: PolicyContext,
    pub grid: TileGrid,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it become relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&read_file(path)?)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip(e))))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.capacity_trace,
            &mut cfg.user_trace,
            &mut cfg.reference_trace,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn grid(&self) -> Result<TileGrid> {
        TileGrid::new(self.grid_rows, self.grid_cols).map_err(config_err)
    }

    pub fn qoe_params(&self) -> Result<QoeParams> {
        let utility = match self.utility.as_str() {
            "linear" => Utility::Linear,
            "log" => Utility::Log {
                scale: self.utility_scale,
            },
            other => return Err(Error::Config(format!("unknown utility `{other}`"))),
        };
        QoeParams::new(self.l_rb, self.l_bd_e, self.l_bd_a, utility).map_err(config_err)
    }

    pub fn step_size(&self) -> Result<StepSize> {
        match self.alpha_schedule.as_str() {
            "fixed" => Ok(StepSize::Fixed { alpha: self.alpha }),
            "horizon" => {
                if !(self.gamma > 0.0) {
                    return Err(Error::Config("gamma must be positive".into()));
                }
                Ok(StepSize::Horizon {
                    alpha0: self.alpha0,
                    gamma: self.gamma,
                    segments: self.segments,
                })
            }
            other => Err(Error::Config(format!(
                "unknown alpha_schedule `{other}` (expected fixed or horizon)"
            ))),
        }
    }

    pub fn fov(&self) -> Result<FovExtent> {
        let grid = self.grid()?;
        let default = if grid.tiles() <= 2 {
            FovExtent::half_view()
        } else {
            FovExtent::quarter_view()
        };
        FovExtent::new(
            self.fov_vertical.unwrap_or(default.vertical),
            self.fov_horizontal.unwrap_or(default.horizontal),
        )
        .map_err(config_err)
    }

    fn initial_decision(&self, ladder: &BitrateLadder, tiles: usize) -> Result<Vec<f64>> {
        let n = ladder.len();
        let level = match self.initial_level.as_str() {
            "median" => ladder.median_level(),
            "min" => 0,
            "max" => n - 1,
            other => match other.parse::<usize>() {
                Ok(k) if (1..=n).contains(&k) => k - 1,
                _ => {
                    return Err(Error::Config(format!(
                        "initial_level `{other}` is not median, min, max or 1..={n}"
                    )))
                }
            },
        };
        Ok(vec![ladder.level(level); tiles])
    }

    /// Loads or generates the traces and assembles everything a run needs.
    pub fn scenario(&self) -> Result<Scenario> {
        let video = VideoConfig::new(self.segments, self.segment_length, self.initial_buffer)
            .map_err(config_err)?;
        let ladder = BitrateLadder::new(self.ladder.clone()).map_err(config_err)?;
        let grid = self.grid()?;
        let extent = self.fov()?;
        let params = self.qoe_params()?;

        let need_seed = self.capacity_trace.is_none()
            || self.user_trace.is_none()
            || self.reference_trace.is_none();
        let mut rng = match (need_seed, self.seed) {
            (false, _) => None,
            (true, Some(seed)) => Some(<rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed)),
            (true, None) => {
                return Err(Error::Config(
                    "synthetic traces need a seed (set `seed` or pass --seed)".into(),
                ))
            }
        };
        let capacity = match &self.capacity_trace {
            Some(p) => read_capacity(p)?,
            None => {
                let video_secs = (self.segments as f64 * self.segment_length).ceil() as usize;
                let spec = CapacitySpec {
                    base: self.capacity_base,
                    step: self.capacity_step,
                    d_min: self.capacity_min,
                    d_max: self.capacity_max,
                    ramp: self.capacity_ramp,
                    seconds: self.capacity_seconds.unwrap_or(2 * video_secs.max(1)),
                };
                generate_capacity(&spec, rng.as_mut().expect("seeded"))?
            }
        };
        let (user, reference) = match (&self.user_trace, &self.reference_trace) {
            (Some(u), Some(r)) => (read_viewport(u, extent)?, read_viewport(r, extent)?),
            (None, None) => {
                let spec = ViewportSpec {
                    start_pitch: self.reference_pitch,
                    start_yaw: self.reference_yaw,
                    pitch_step: self.viewport_pitch_step,
                    yaw_step: self.viewport_yaw_step,
                    preference_pitch: self.preference_pitch,
                    preference_yaw: self.preference_yaw,
                    jitter_step: self.jitter_step,
                    segments: self.segments,
                };
                generate_viewports(&spec, extent, rng.as_mut().expect("seeded"))?
            }
            _ => {
                return Err(Error::Config(
                    "user_trace and reference_trace must be given together".into(),
                ))
            }
        };
        if user.len() < self.segments {
            return Err(Error::Config(format!(
                "viewport traces cover {} segments, config asks for {}",
                user.len(),
                self.segments
            )));
        }
        let omega = overlap_fractions(&user, &reference, grid)?;

        let options = Obs360Options {
            step: self.step_size()?,
            rate_limit: self.rate_limit,
            initial: Some(self.initial_decision(&ladder, grid.tiles())?),
            method: self.optimum_method,
        };
        Ok(Scenario {
            sim: SimConfig {
                video,
                ladder: ladder.clone(),
                mode: self.mode,
                exhaustion: self.trace_exhaustion,
                reveal: self.reveal,
            },
            params,
            inputs: SessionInputs { capacity, omega },
            policies: PolicyContext {
                ladder,
                mode: self.mode,
                tiles: grid.tiles(),
                params,
                obs360: options,
            },
            grid,
        })
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) | Error::Validation(m) => Error::Config(m),
        other => other,
    }
}
