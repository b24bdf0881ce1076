use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An `rows x cols` equirectangular tiling. Row 1 is the top (north pole),
/// column 1 starts at yaw -180 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileGrid {
    rows: usize,
    cols: usize,
}

impl TileGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "tile grid must have at least one row and column, got {rows}x{cols}"
            )));
        }
        Ok(TileGrid { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tiles(&self) -> usize {
        self.rows * self.cols
    }

    /// Angular height of one tile row, degrees of pitch.
    pub fn tile_height(&self) -> f64 {
        180.0 / self.rows as f64
    }

    /// Angular width of one tile column, degrees of yaw.
    pub fn tile_width(&self) -> f64 {
        360.0 / self.cols as f64
    }
}

/// Index (1-based) of the tile at row `m`, column `n` when the reference
/// viewport's top-left tile sits at row `m0`, column `n0`.
///
/// Indices run row-major from the reference tile and wrap around both axes,
/// so the reference tile is always tile 1:
/// `N * ((m - m0) mod M) + ((n - n0) mod N) + 1`.
pub fn tile_index(m: usize, n: usize, m0: usize, n0: usize, grid: TileGrid) -> Result<usize> {
    let (rows, cols) = (grid.rows, grid.cols);
    for (name, v, hi) in [("m", m, rows), ("m0", m0, rows), ("n", n, cols), ("n0", n0, cols)] {
        if v == 0 || v > hi {
            return Err(Error::invalid(format!("{name}={v} outside 1..={hi}")));
        }
    }
    let dm = (m + rows - m0) % rows;
    let dn = (n + cols - n0) % cols;
    Ok(cols * dm + dn + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn figure_example() {
        let grid = TileGrid::new(4, 4).unwrap();
        assert_eq!(tile_index(2, 4, 2, 2, grid).unwrap(), 3);
        assert_eq!(tile_index(1, 1, 2, 2, grid).unwrap(), 16);
        assert_eq!(tile_index(3, 3, 3, 3, grid).unwrap(), 1);
    }

    #[test]
    fn rectangular_grid_uses_column_count() {
        let grid = TileGrid::new(2, 3).unwrap();
        // one row below the reference: 3 * 1 + 0 + 1
        assert_eq!(tile_index(2, 1, 1, 1, grid).unwrap(), 4);
        assert_eq!(tile_index(1, 3, 2, 1, grid).unwrap(), 6);
    }

    #[test]
    fn out_of_range() {
        let grid = TileGrid::new(4, 4).unwrap();
        assert!(tile_index(0, 1, 1, 1, grid).is_err());
        assert!(tile_index(1, 5, 1, 1, grid).is_err());
        assert!(tile_index(1, 1, 5, 1, grid).is_err());
        assert!(TileGrid::new(0, 3).is_err());
    }

    proptest! {
        #[test]
        fn bijection(rows in 1usize..7, cols in 1usize..7, seed in 0usize..1000) {
            let grid = TileGrid::new(rows, cols).unwrap();
            let m0 = seed % rows + 1;
            let n0 = (seed / 7) % cols + 1;
            let mut seen = vec![false; grid.tiles()];
            for m in 1..=rows {
                for n in 1..=cols {
                    let k = tile_index(m, n, m0, n0, grid).unwrap();
                    prop_assert!(!seen[k - 1]);
                    seen[k - 1] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }

        #[test]
        fn translation_invariant(rows in 1usize..7, cols in 1usize..7,
                                 m in 1usize..7, n in 1usize..7, m0 in 1usize..7, n0 in 1usize..7,
                                 dm in 0usize..7, dn in 0usize..7) {
            let grid = TileGrid::new(rows, cols).unwrap();
            let (m, n, m0, n0) = ((m - 1) % rows + 1, (n - 1) % cols + 1, (m0 - 1) % rows + 1, (n0 - 1) % cols + 1);
            let shift_r = |x: usize| (x - 1 + dm) % rows + 1;
            let shift_c = |x: usize| (x - 1 + dn) % cols + 1;
            prop_assert_eq!(
                tile_index(m, n, m0, n0, grid).unwrap(),
                tile_index(shift_r(m), shift_c(n), shift_r(m0), shift_c(n0), grid).unwrap()
            );
        }
    }
}
