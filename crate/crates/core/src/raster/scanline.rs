// SPDX-License-Identifier: Apache-2.0

//! Active-edge scanline fill over supersample rows.
//!
//! A sample at `(px, py)` is inside a polygon when its winding number is
//! nonzero, counting every edge with `y_lo <= py < y_hi` whose crossing lies
//! at or left of `px`. Left/bottom boundaries are therefore inside and
//! right/top ones outside, so abutting shapes and abutting tiles never
//! double-cover or leave seams. Coverage is the union over polygons: a
//! sample counts once if any polygon winds around it.
//!
//! Sample positions are computed from global sample indices, so a tile's
//! result does not depend on how the raster was partitioned.

use super::{CoverageTile, RenderFrame, TileRect};
use crate::geom::FlatPolygon;

struct Edge {
    x_lo: f64,
    y_lo: f64,
    dx: f64,
    dy: f64,
    dir: i32,
    poly: u32,
    first_row: i64,
    end_row: i64,
}

impl Edge {
    /// Crossing predicate: the edge lies at or left of `px` on row `py`.
    #[inline]
    fn left_of(&self, px: f64, py: f64) -> bool {
        (px - self.x_lo) * self.dy - self.dx * (py - self.y_lo) >= 0.0
    }
}

/// Smallest global sample row whose y is strictly below `y`.
fn first_row_below(frame: &RenderFrame, y: f64) -> i64 {
    let step = frame.sample_step();
    let mut g = ((frame.y1() - y) / step - 0.5).floor() as i64;
    while frame.sample_y(g - 1) < y {
        g -= 1;
    }
    while frame.sample_y(g) >= y {
        g += 1;
    }
    g
}

/// First sample column in `[lo, hi]` at which the edge has been crossed.
#[inline]
fn crossing_column(frame: &RenderFrame, e: &Edge, py: f64, lo: i64, hi: i64) -> i64 {
    let step = frame.sample_step();
    let x = e.x_lo + e.dx * (py - e.y_lo) / e.dy;
    let est = ((x - frame.x0()) / step - 0.5).ceil();
    let mut g = if est.is_nan() {
        lo
    } else {
        (est.max(lo as f64).min(hi as f64)) as i64
    };
    while g > lo && e.left_of(frame.sample_x(g - 1), py) {
        g -= 1;
    }
    while g < hi && !e.left_of(frame.sample_x(g), py) {
        g += 1;
    }
    g
}

/// Rasterizes the union of `polys` into one coverage tile.
pub fn rasterize_tile(
    polys: &[&FlatPolygon],
    frame: &RenderFrame,
    tile: &TileRect,
) -> CoverageTile {
    let s = frame.supersample as i64;
    let (w, h) = (tile.w, tile.h);
    let mut out = CoverageTile::blank(tile, frame);
    if polys.is_empty() {
        return out;
    }
    let row_lo = tile.y as i64 * s;
    let row_hi = (tile.y + h) as i64 * s;
    let col_lo = tile.x as i64 * s;
    let col_hi = (tile.x + w) as i64 * s;

    let mut edges: Vec<Edge> = Vec::new();
    for (pi, p) in polys.iter().enumerate() {
        for (a, b) in p.edges() {
            if a.y == b.y {
                continue;
            }
            let (lo, hi, dir) = if a.y < b.y { (a, b, 1) } else { (b, a, -1) };
            let first_row = first_row_below(frame, hi.y as f64).max(row_lo);
            let end_row = first_row_below(frame, lo.y as f64).min(row_hi);
            if first_row >= end_row {
                continue;
            }
            edges.push(Edge {
                x_lo: lo.x as f64,
                y_lo: lo.y as f64,
                dx: (hi.x - lo.x) as f64,
                dy: (hi.y - lo.y) as f64,
                dir,
                poly: pi as u32,
                first_row,
                end_row,
            });
        }
    }
    edges.sort_by_key(|e| e.first_row);

    let mut winding = vec![0i32; polys.len()];
    let mut active: Vec<usize> = Vec::new();
    let mut crossings: Vec<(i64, i32, u32)> = Vec::new();
    let mut counts = vec![0u8; w];
    let lut = coverage_lut(frame.supersample);
    let mut next_edge = 0;

    for py_row in 0..h {
        counts.iter_mut().for_each(|c| *c = 0);
        for sub in 0..s {
            let g = row_lo + py_row as i64 * s + sub;
            while next_edge < edges.len() && edges[next_edge].first_row <= g {
                active.push(next_edge);
                next_edge += 1;
            }
            active.retain(|&i| edges[i].end_row > g);
            if active.is_empty() {
                continue;
            }
            let py = frame.sample_y(g);
            crossings.clear();
            crossings.extend(active.iter().map(|&i| {
                let e = &edges[i];
                (crossing_column(frame, e, py, col_lo, col_hi), e.dir, e.poly)
            }));
            crossings.sort_unstable_by_key(|c| c.0);

            let mut inside = 0usize;
            let mut prev = col_lo;
            for &(pos, dir, poly) in &crossings {
                if inside > 0 && pos > prev {
                    add_span(
                        &mut counts,
                        (prev - col_lo) as usize,
                        (pos - col_lo) as usize,
                        s as usize,
                    );
                }
                let wnd = &mut winding[poly as usize];
                let was = *wnd != 0;
                *wnd += dir;
                match (was, *wnd != 0) {
                    (false, true) => inside += 1,
                    (true, false) => inside -= 1,
                    _ => {}
                }
                prev = pos;
            }
            debug_assert_eq!(inside, 0, "unbalanced winding on a closed polygon set");
        }
        let row = &mut out.coverage[py_row * w..(py_row + 1) * w];
        for (dst, &k) in row.iter_mut().zip(&counts) {
            *dst = lut[k as usize];
        }
    }
    out
}

/// Adds one hit per sample in `[a, b)` (tile-local sample columns) to the
/// per-pixel counters.
#[inline]
fn add_span(counts: &mut [u8], a: usize, b: usize, s: usize) {
    if s == 1 {
        counts[a..b].iter_mut().for_each(|c| *c += 1);
        return;
    }
    let (pa, pb) = (a / s, b / s);
    if pa == pb {
        counts[pa] += (b - a) as u8;
        return;
    }
    counts[pa] += (s - a % s) as u8;
    counts[pa + 1..pb].iter_mut().for_each(|c| *c += s as u8);
    if !b.is_multiple_of(s) {
        counts[pb] += (b % s) as u8;
    }
}

/// `round(255 k / s²)` for each sample count `k`.
fn coverage_lut(s: u32) -> Vec<u8> {
    let n = (s * s) as u64;
    (0..=n)
        .map(|k| ((255 * k * 2 + n) / (2 * n)) as u8)
        .collect()
}
