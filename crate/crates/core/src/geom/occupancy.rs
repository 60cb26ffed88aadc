// SPDX-License-Identifier: Apache-2.0

use super::FlatPolygon;
use crate::coord::{Point, Rect};

/// Dense bit matrix indexed `(col, row)`, row 0 at the bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGrid {
    cols: usize,
    rows: usize,
    words: Vec<u64>,
}

impl BitGrid {
    pub fn new(cols: usize, rows: usize) -> Self {
        Self {
            cols,
            rows,
            words: vec![0; (cols * rows).div_ceil(64)],
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        debug_assert!(col < self.cols && row < self.rows);
        let i = row * self.cols + col;
        self.words[i / 64] >> (i % 64) & 1 != 0
    }

    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        debug_assert!(col < self.cols && row < self.rows);
        let i = row * self.cols + col;
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set cells in row-major order, bottom row first.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (0..self.cols)
                .filter(move |&c| self.get(c, r))
                .map(move |c| (c, r))
        })
    }
}

/// Cells of a square lattice that existing geometry (plus keepout) touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyGrid {
    pub origin: Point,
    pub pitch: i64,
    pub occupied: BitGrid,
}

impl OccupancyGrid {
    pub fn empty(origin: Point, pitch: i64, cols: usize, rows: usize) -> Self {
        Self {
            origin,
            pitch,
            occupied: BitGrid::new(cols, rows),
        }
    }

    pub fn cols(&self) -> usize {
        self.occupied.cols()
    }

    pub fn rows(&self) -> usize {
        self.occupied.rows()
    }

    pub fn is_occupied(&self, col: usize, row: usize) -> bool {
        self.occupied.get(col, row)
    }

    pub fn cell_rect(&self, col: usize, row: usize) -> Rect {
        let x = self.origin.x + col as i64 * self.pitch;
        let y = self.origin.y + row as i64 * self.pitch;
        Rect::new(x, y, x + self.pitch, y + self.pitch)
    }

    /// Marks every cell whose square has interior overlap with `r`.
    pub fn mark_rect(&mut self, r: &Rect) {
        let (cols, rows) = (self.cols() as i64, self.rows() as i64);
        let p = self.pitch;
        let c0 = (r.x0 - self.origin.x).div_euclid(p).max(0);
        let c1 = (r.x1 - self.origin.x + p - 1).div_euclid(p).min(cols);
        let r0 = (r.y0 - self.origin.y).div_euclid(p).max(0);
        let r1 = (r.y1 - self.origin.y + p - 1).div_euclid(p).min(rows);
        for row in r0..r1 {
            for col in c0..c1 {
                self.occupied.set(col as usize, row as usize, true);
            }
        }
    }
}

/// Marks each cell whose square overlaps a polygon's bounding box grown by
/// `keepout`. Conservative: may overmark, never undermarks.
pub fn build_occupancy<'a>(
    polys: impl IntoIterator<Item = &'a FlatPolygon>,
    origin: Point,
    pitch: i64,
    cols: usize,
    rows: usize,
    keepout: i64,
) -> OccupancyGrid {
    assert!(
        pitch > 0 && keepout >= 0,
        "pitch must be positive and keepout non-negative"
    );
    let mut grid = OccupancyGrid::empty(origin, pitch, cols, rows);
    for p in polys {
        grid.mark_rect(&p.bbox.expand(keepout));
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdsii::LayerKey;
    use proptest::prelude::*;

    fn rect_poly(r: Rect) -> FlatPolygon {
        FlatPolygon::rect(LayerKey::new(1, 0), r).unwrap()
    }

    #[test]
    fn empty_stream_is_clear() {
        let g = build_occupancy([], Point::new(0, 0), 10, 5, 5, 3);
        assert_eq!(g.occupied.count_ones(), 0);
    }

    #[test]
    fn exact_cell_cover() {
        let p = rect_poly(Rect::new(0, 0, 10, 10));
        let g = build_occupancy([&p], Point::new(0, 0), 10, 5, 5, 0);
        assert_eq!(g.occupied.iter_set().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn keepout_of_one_pitch_marks_neighbours() {
        let p = rect_poly(Rect::new(20, 20, 30, 30));
        let g = build_occupancy([&p], Point::new(0, 0), 10, 5, 5, 10);
        let mut set: Vec<_> = g.occupied.iter_set().collect();
        set.sort();
        let mut want = vec![];
        for c in 1..=3 {
            for r in 1..=3 {
                want.push((c, r));
            }
        }
        assert_eq!(set, want);
    }

    proptest! {
        #[test]
        fn every_polygon_point_lands_in_a_marked_cell(
            x in -50i64..250, y in -50i64..250, w in 1i64..80, h in 1i64..80,
            keepout in 0i64..20, fx in 0.0f64..=1.0, fy in 0.0f64..=1.0,
        ) {
            let r = Rect::new(x, y, x + w, y + h);
            let g = build_occupancy([&rect_poly(r)], Point::new(0, 0), 16, 12, 12, keepout);
            let px = x + (fx * w as f64) as i64;
            let py = y + (fy * h as f64) as i64;
            // cells whose closed square contains the point
            let cands: Vec<(i64, i64)> = [(px - 1).div_euclid(16), px.div_euclid(16)]
                .iter()
                .flat_map(|&c| [(py - 1).div_euclid(16), py.div_euclid(16)].map(|r| (c, r)))
                .filter(|&(c, r)| c * 16 <= px && px <= c * 16 + 16 && r * 16 <= py && py <= r * 16 + 16)
                .filter(|&(c, r)| (0..12).contains(&c) && (0..12).contains(&r))
                .collect();
            if !cands.is_empty() {
                prop_assert!(cands.iter().any(|&(c, r)| g.is_occupied(c as usize, r as usize)));
            }
        }
    }
}
