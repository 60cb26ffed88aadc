// SPDX-License-Identifier: Apache-2.0

use super::{ArtError, ArtRules, BwImage};
use crate::coord::{Point, Rect};
use crate::geom::{BitGrid, OccupancyGrid};

/// Logo resampled onto the art lattice. Row 0 is the bottom row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InkGrid {
    pub ink: BitGrid,
    pub placement: Rect,
    pub pitch: i64,
}

impl InkGrid {
    pub fn cols(&self) -> usize {
        self.ink.cols()
    }

    pub fn rows(&self) -> usize {
        self.ink.rows()
    }

    pub fn origin(&self) -> Point {
        Point::new(self.placement.x0, self.placement.y0)
    }

    /// Lower-left corner of a cell's drawn square.
    pub fn cell_origin(&self, col: usize, row: usize) -> Point {
        Point::new(
            self.placement.x0 + col as i64 * self.pitch,
            self.placement.y0 + row as i64 * self.pitch,
        )
    }

    /// An all-clear occupancy grid on the same lattice.
    pub fn empty_occupancy(&self) -> OccupancyGrid {
        OccupancyGrid::empty(self.origin(), self.pitch, self.cols(), self.rows())
    }

    pub fn matches(&self, occ: &OccupancyGrid) -> bool {
        occ.origin == self.origin()
            && occ.pitch == self.pitch
            && occ.cols() == self.cols()
            && occ.rows() == self.rows()
    }
}

/// Majority-vote resampling of `bw` onto the lattice over `placement`.
pub fn map_logo_to_grid(
    bw: &BwImage,
    placement: Rect,
    rules: &ArtRules,
) -> Result<InkGrid, ArtError> {
    rules.validate()?;
    if bw.width == 0 || bw.height == 0 {
        return Err(ArtError::EmptyImage);
    }
    let pitch = rules.pitch();
    let cols = (placement.width() / pitch).max(0) as usize;
    let rows = (placement.height() / pitch).max(0) as usize;
    if cols < 2 || rows < 2 {
        return Err(ArtError::GridTooSmall { cols, rows });
    }
    let logo = bw.width as f64 / bw.height as f64;
    let place = placement.width() as f64 / placement.height() as f64;
    if ((logo - place) / place).abs() > 0.01 {
        return Err(ArtError::AspectMismatch {
            logo,
            placement: place,
        });
    }

    let mut ink_count = vec![0u32; cols * rows];
    let mut total = vec![0u32; cols * rows];
    for y in 0..bw.height {
        let top_row = y * rows / bw.height;
        for x in 0..bw.width {
            let col = x * cols / bw.width;
            let i = top_row * cols + col;
            total[i] += 1;
            ink_count[i] += bw.get(x, y) as u32;
        }
    }

    let mut ink = BitGrid::new(cols, rows);
    for top_row in 0..rows {
        for col in 0..cols {
            let i = top_row * cols + col;
            let v = if total[i] == 0 {
                let x = (2 * col + 1) * bw.width / (2 * cols);
                let y = (2 * top_row + 1) * bw.height / (2 * rows);
                bw.get(x, y)
            } else {
                2 * ink_count[i] >= total[i]
            };
            ink.set(col, rows - 1 - top_row, v);
        }
    }
    Ok(InkGrid {
        ink,
        placement,
        pitch,
    })
}
