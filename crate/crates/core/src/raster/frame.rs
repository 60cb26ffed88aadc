// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::RasterError;
use crate::coord::Rect;
use crate::geom::BinSpec;

pub const DEFAULT_MAX_TILE_PX: u64 = 250_000_000;

/// Maps a chip window onto an output raster.
///
/// Pixel `(i, j)` has its center at chip point
/// `(x0 + (i + 0.5) * dbu_per_px, y1 - (j + 0.5) * dbu_per_px)`: image rows
/// grow downward while chip y grows upward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderFrame {
    pub chip_window: Rect,
    pub nm_per_px: f64,
    pub nm_per_dbu: f64,
    pub out_width_px: usize,
    pub out_height_px: usize,
    pub supersample: u32,
    pub max_tile_px: u64,
}

impl RenderFrame {
    pub fn new(
        chip_window: Rect,
        nm_per_px: f64,
        nm_per_dbu: f64,
        supersample: u32,
        max_tile_px: u64,
    ) -> Result<Self, RasterError> {
        if !nm_per_px.is_finite() || nm_per_px <= 0.0 || nm_per_dbu.is_nan() || nm_per_dbu <= 0.0 {
            return Err(RasterError::BadResolution(nm_per_px));
        }
        if ![1, 2, 4, 8].contains(&supersample) {
            return Err(RasterError::BadSupersample(supersample));
        }
        let w_nm = chip_window.width() as f64 * nm_per_dbu;
        let h_nm = chip_window.height() as f64 * nm_per_dbu;
        let out_width_px = (w_nm / nm_per_px).ceil() as usize;
        let out_height_px = (h_nm / nm_per_px).ceil() as usize;
        if out_width_px == 0 || out_height_px == 0 {
            return Err(RasterError::EmptyFrame);
        }
        Ok(Self {
            chip_window,
            nm_per_px,
            nm_per_dbu,
            out_width_px,
            out_height_px,
            supersample,
            max_tile_px,
        })
    }

    /// Grows the raster (right and down) to a multiple of `factor` so that
    /// integer box-downscaling divides every tile.
    pub fn pad_to_multiple(mut self, factor: usize) -> Self {
        self.out_width_px = self.out_width_px.div_ceil(factor) * factor;
        self.out_height_px = self.out_height_px.div_ceil(factor) * factor;
        self
    }

    pub fn dbu_per_px(&self) -> f64 {
        self.nm_per_px / self.nm_per_dbu
    }

    pub fn x0(&self) -> f64 {
        self.chip_window.x0 as f64
    }

    pub fn y1(&self) -> f64 {
        self.chip_window.y1 as f64
    }

    pub fn pixel_count(&self) -> u64 {
        self.out_width_px as u64 * self.out_height_px as u64
    }

    /// Chip coordinates of the center of pixel `(i, j)`.
    pub fn pixel_center(&self, i: usize, j: usize) -> (f64, f64) {
        let d = self.dbu_per_px();
        (
            self.x0() + (i as f64 + 0.5) * d,
            self.y1() - (j as f64 + 0.5) * d,
        )
    }

    /// Distance between sample centers in dbu.
    pub fn sample_step(&self) -> f64 {
        self.dbu_per_px() / self.supersample as f64
    }

    /// Chip x of global sample column `g`.
    #[inline]
    pub fn sample_x(&self, g: i64) -> f64 {
        self.x0() + (g as f64 + 0.5) * self.sample_step()
    }

    /// Chip y of global sample row `g`.
    #[inline]
    pub fn sample_y(&self, g: i64) -> f64 {
        self.y1() - (g as f64 + 0.5) * self.sample_step()
    }

    pub fn bin_spec(&self, grid: &TileGrid) -> BinSpec {
        BinSpec {
            x0: self.x0(),
            y1: self.y1(),
            dbu_per_px: self.dbu_per_px(),
            width_px: self.out_width_px,
            height_px: self.out_height_px,
            tile_w: grid.tile_w,
            tile_h: grid.tile_h,
        }
    }
}

/// Pixel rectangle of one tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileRect {
    pub index: usize,
    pub col: usize,
    pub row: usize,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Row-major partition of the raster into tiles; edge tiles may be smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGrid {
    pub width: usize,
    pub height: usize,
    pub tile_w: usize,
    pub tile_h: usize,
    pub cols: usize,
    pub rows: usize,
}

impl TileGrid {
    pub fn new(width: usize, height: usize, tile_w: usize, tile_h: usize) -> Self {
        Self {
            width,
            height,
            tile_w,
            tile_h,
            cols: width.div_ceil(tile_w),
            rows: height.div_ceil(tile_h),
        }
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tile(&self, index: usize) -> TileRect {
        let (col, row) = (index % self.cols, index / self.cols);
        let (x, y) = (col * self.tile_w, row * self.tile_h);
        TileRect {
            index,
            col,
            row,
            x,
            y,
            w: self.tile_w.min(self.width - x),
            h: self.tile_h.min(self.height - y),
        }
    }

    pub fn tiles(&self) -> impl Iterator<Item = TileRect> + '_ {
        (0..self.len()).map(|i| self.tile(i))
    }

    /// The same partition at `1/factor` resolution.
    pub fn scaled_down(&self, factor: usize) -> TileGrid {
        TileGrid {
            width: self.width / factor,
            height: self.height / factor,
            tile_w: self.tile_w / factor,
            tile_h: self.tile_h / factor,
            cols: self.cols,
            rows: self.rows,
        }
    }
}

/// Square tiles whose edge is `floor(sqrt(max_tile_px))` rounded down to a
/// multiple of 8, clipped to the raster.
pub fn plan_tiles(frame: &RenderFrame) -> Result<TileGrid, RasterError> {
    if frame.max_tile_px < 64 {
        return Err(RasterError::TileCapTooSmall(frame.max_tile_px));
    }
    if frame.out_width_px == 0 || frame.out_height_px == 0 {
        return Err(RasterError::EmptyFrame);
    }
    let (w, h) = (frame.out_width_px, frame.out_height_px);
    if (w as u64) * (h as u64) <= frame.max_tile_px {
        return Ok(TileGrid::new(w, h, w, h));
    }
    let edge = (frame.max_tile_px.isqrt() / 8 * 8) as usize;
    Ok(TileGrid::new(
        frame.out_width_px,
        frame.out_height_px,
        frame.out_width_px.min(edge),
        frame.out_height_px.min(edge),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: usize, h: usize, cap: u64) -> RenderFrame {
        RenderFrame::new(Rect::new(0, 0, w as i64, h as i64), 1.0, 1.0, 1, cap).unwrap()
    }

    #[test]
    fn single_tile_when_under_cap() {
        let g = plan_tiles(&frame(100, 100, 10_000)).unwrap();
        assert_eq!((g.cols, g.rows, g.tile_w, g.tile_h), (1, 1, 100, 100));
    }

    #[test]
    fn sqrt_edge_is_snapped_down() {
        // floor(sqrt(2500)) = 50, snapped to 48: a 3x3 grid with 4 px edge tiles
        let g = plan_tiles(&frame(100, 100, 2_500)).unwrap();
        assert_eq!((g.cols, g.rows, g.tile_w, g.tile_h), (3, 3, 48, 48));
        assert_eq!(g.tile(8).w, 4);
    }

    #[test]
    fn edge_rounded_to_multiple_of_eight() {
        let g = plan_tiles(&frame(1000, 600, 250_000)).unwrap();
        assert_eq!((g.tile_w, g.tile_h), (496, 496));
        assert_eq!((g.cols, g.rows), (3, 2));
        assert_eq!(g.tile(2).w, 8);
        assert_eq!(g.tile(2).h, 496);
        assert_eq!(g.tile(3).h, 104);
        assert_eq!(g.tile(5).w * g.tile(5).h, 8 * 104);
    }

    #[test]
    fn tiles_partition_raster() {
        let g = plan_tiles(&frame(1000, 600, 250_000)).unwrap();
        let area: usize = g.tiles().map(|t| t.w * t.h).sum();
        assert_eq!(area, 600_000);
    }

    #[test]
    fn cap_below_64_rejected() {
        assert!(matches!(
            plan_tiles(&frame(10, 10, 63)),
            Err(RasterError::TileCapTooSmall(63))
        ));
    }

    #[test]
    fn dims_round_up() {
        let f =
            RenderFrame::new(Rect::new(0, 0, 1001, 10), 25.0, 1.0, 1, DEFAULT_MAX_TILE_PX).unwrap();
        assert_eq!((f.out_width_px, f.out_height_px), (41, 1));
        assert!(RenderFrame::new(Rect::new(0, 0, 10, 10), 1.0, 1.0, 3, 100).is_err());
        assert_eq!(f.pad_to_multiple(4).out_width_px, 44);
    }
}
