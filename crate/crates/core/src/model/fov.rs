//! Viewports on the equirectangular frame and their per-tile overlap.
//!
//! A field of view is an axis-aligned pitch x yaw rectangle centered on the
//! viewing direction. Horizontally it wraps around the sphere. Vertically the
//! rectangle slides so that it stays inside `[-90, 90]`, which keeps its area
//! (and therefore the total overlap) constant across segments.

use serde::{Deserialize, Serialize};

use super::tiles::{tile_index, TileGrid};
use crate::{Error, Result};

/// Viewing direction of one segment, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub pitch: f64,
    pub yaw: f64,
}

impl Viewport {
    pub fn new(pitch: f64, yaw: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&pitch) {
            return Err(Error::Validation(format!("pitch {pitch} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&yaw) {
            return Err(Error::Validation(format!("yaw {yaw} outside [-180, 180]")));
        }
        Ok(Viewport { pitch, yaw })
    }
}

/// Angular size of the visible rectangle, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovExtent {
    pub vertical: f64,
    pub horizontal: f64,
}

impl FovExtent {
    pub fn new(vertical: f64, horizontal: f64) -> Result<Self> {
        if !(vertical > 0.0 && vertical <= 180.0) || !(horizontal > 0.0 && horizontal <= 360.0) {
            return Err(Error::invalid(format!(
                "fov extent {vertical}x{horizontal} outside (0,180]x(0,360]"
            )));
        }
        Ok(FovExtent {
            vertical,
            horizontal,
        })
    }

    /// Half of the sphere: full height, half the circumference.
    pub fn half_view() -> Self {
        FovExtent {
            vertical: 180.0,
            horizontal: 180.0,
        }
    }

    /// A quarter of the sphere: half the height, half the circumference.
    pub fn quarter_view() -> Self {
        FovExtent {
            vertical: 90.0,
            horizontal: 180.0,
        }
    }

    pub fn full_sphere() -> Self {
        FovExtent {
            vertical: 180.0,
            horizontal: 360.0,
        }
    }

    /// Rectangle area measured in tiles of `grid`.
    pub fn area_in_tiles(&self, grid: TileGrid) -> f64 {
        (self.vertical / grid.tile_height()) * (self.horizontal / grid.tile_width())
    }
}

/// One viewport per segment plus the shared field-of-view size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewportTrace {
    viewports: Vec<Viewport>,
    extent: FovExtent,
}

impl ViewportTrace {
    pub fn new(viewports: Vec<Viewport>, extent: FovExtent) -> Result<Self> {
        for v in &viewports {
            Viewport::new(v.pitch, v.yaw)?;
        }
        Ok(ViewportTrace { viewports, extent })
    }

    pub fn viewports(&self) -> &[Viewport] {
        &self.viewports
    }

    pub fn extent(&self) -> FovExtent {
        self.extent
    }

    pub fn len(&self) -> usize {
        self.viewports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.viewports.is_empty()
    }
}

/// Per-segment, per-tile fraction of each tile covered by the user's view.
/// `omega[i][k]` is segment `i + 1`, tile `k + 1` (reference-relative index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapMap {
    omega: Vec<Vec<f64>>,
}

impl OverlapMap {
    pub fn new(omega: Vec<Vec<f64>>) -> Result<Self> {
        let width = omega.first().map_or(0, Vec::len);
        for row in &omega {
            if row.len() != width {
                return Err(Error::invalid("overlap rows must all have K entries"));
            }
            if row.iter().any(|w| !(0.0..=1.0).contains(w)) {
                return Err(Error::invalid("overlap fractions must lie in [0, 1]"));
            }
        }
        Ok(OverlapMap { omega })
    }

    pub fn segment(&self, i: usize) -> &[f64] {
        &self.omega[i]
    }

    pub fn segments(&self) -> usize {
        self.omega.len()
    }

    pub fn tiles(&self) -> usize {
        self.omega.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.omega
    }
}

/// Pitch interval `(bottom, top)` and yaw start of the visible rectangle.
#[derive(Debug, Clone, Copy)]
struct Rect {
    bottom: f64,
    top: f64,
    left: f64,
    width: f64,
}

impl Rect {
    fn around(view: Viewport, extent: FovExtent) -> Rect {
        let half_v = extent.vertical / 2.0;
        let center = view.pitch.clamp(-90.0 + half_v, 90.0 - half_v);
        Rect {
            bottom: center - half_v,
            top: center + half_v,
            left: wrap_yaw(view.yaw - extent.horizontal / 2.0),
            width: extent.horizontal,
        }
    }
}

/// Maps a yaw angle into `[-180, 180)`.
fn wrap_yaw(yaw: f64) -> f64 {
    let w = (yaw + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        -180.0
    } else {
        w
    }
}

fn interval_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

// Snapping tolerance for corners that sit on a tile boundary up to rounding.
const SNAP_EPS: f64 = 1e-9;

/// Row and column (1-based) of the tile containing the rectangle's top-left corner.
fn top_left_tile(rect: &Rect, grid: TileGrid) -> (usize, usize) {
    let row = ((90.0 - rect.top) / grid.tile_height() + SNAP_EPS).floor() as usize;
    let col = ((rect.left + 180.0) / grid.tile_width() + SNAP_EPS).floor() as usize;
    (row.min(grid.rows() - 1) + 1, col % grid.cols() + 1)
}

/// Fraction of tile (`row`, `col`) covered by `rect`.
fn cell_fraction(rect: &Rect, row: usize, col: usize, grid: TileGrid) -> f64 {
    let (th, tw) = (grid.tile_height(), grid.tile_width());
    let cell_top = 90.0 - (row - 1) as f64 * th;
    let pitch = interval_overlap(rect.bottom, rect.top, cell_top - th, cell_top);
    if pitch <= 0.0 {
        return 0.0;
    }
    let cell_left = -180.0 + (col - 1) as f64 * tw;
    let (l, r) = (rect.left, rect.left + rect.width);
    let yaw = interval_overlap(l, r, cell_left, cell_left + tw)
        + interval_overlap(l - 360.0, r - 360.0, cell_left, cell_left + tw);
    ((pitch / th) * (yaw / tw)).clamp(0.0, 1.0)
}

/// Converts a user's viewport trace into reference-relative tile overlaps.
///
/// For every segment the tiles are indexed with [`tile_index`] relative to the
/// tile holding the top-left corner of the reference viewport, and each entry
/// is the fraction of that tile's angular area covered by the user's view.
pub fn overlap_fractions(
    user: &ViewportTrace,
    reference: &ViewportTrace,
    grid: TileGrid,
) -> Result<OverlapMap> {
    if user.len() != reference.len() {
        return Err(Error::invalid(format!(
            "user trace has {} segments but reference has {}",
            user.len(),
            reference.len()
        )));
    }
    let mut omega = Vec::with_capacity(user.len());
    for (u, r) in user.viewports.iter().zip(&reference.viewports) {
        let view = Rect::around(*u, user.extent);
        let (m0, n0) = top_left_tile(&Rect::around(*r, reference.extent), grid);
        let mut row = vec![0.0; grid.tiles()];
        for m in 1..=grid.rows() {
            for n in 1..=grid.cols() {
                let k = tile_index(m, n, m0, n0, grid)?;
                row[k - 1] = cell_fraction(&view, m, n, grid);
            }
        }
        omega.push(row);
    }
    OverlapMap::new(omega)
}
