// SPDX-License-Identifier: Apache-2.0

use std::cmp::Reverse;
use std::collections::BTreeSet;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::drc::window_counts;
use super::shapes::{shape_catalog, shape_outline};
use super::{ArtError, ArtPolyomino, ArtRules, InkGrid};
use crate::gdsii::LayerKey;
use crate::geom::{BitGrid, FlatPolygon, OccupancyGrid};

/// Art generation: greedy tiling followed by density thinning.
pub fn generate_art(
    grid: &InkGrid,
    occ: &OccupancyGrid,
    rules: &ArtRules,
) -> Result<Vec<ArtPolyomino>, ArtError> {
    let shapes = tile_art(grid, occ, rules)?;
    Ok(thin_density(shapes, grid, rules))
}

/// Greedy raster-scan tiling of the free ink cells, without density limits.
///
/// Cells are visited bottom row first, left to right. At each uncovered
/// free cell the first catalog shape whose cells are all free and uncovered
/// is placed with that cell as its anchor. Cells no allowed shape fits are
/// left empty.
pub fn tile_art(
    grid: &InkGrid,
    occ: &OccupancyGrid,
    rules: &ArtRules,
) -> Result<Vec<ArtPolyomino>, ArtError> {
    rules.validate()?;
    if !grid.matches(occ) {
        return Err(ArtError::GridMismatch);
    }
    let (cols, rows) = (grid.cols() as i32, grid.rows() as i32);
    let mut free = BitGrid::new(grid.cols(), grid.rows());
    for (c, r) in grid.ink.iter_set() {
        if !occ.is_occupied(c, r) {
            free.set(c, r, true);
        }
    }
    let catalog = shape_catalog(rules.min_cells as usize, rules.max_cells as usize);
    let mut shapes = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if !free.get(c as usize, r as usize) {
                continue;
            }
            let fits = |o: &[(i32, i32)]| {
                o.iter().all(|&(dc, dr)| {
                    let (x, y) = (c + dc, r + dr);
                    (0..cols).contains(&x)
                        && (0..rows).contains(&y)
                        && free.get(x as usize, y as usize)
                })
            };
            let Some((kind, o)) = catalog.iter().find(|(_, o)| fits(o)) else {
                continue;
            };
            let cells: Vec<(usize, usize)> = o
                .iter()
                .map(|&(dc, dr)| ((c + dc) as usize, (r + dr) as usize))
                .collect();
            for &(x, y) in &cells {
                free.set(x, y, false);
            }
            let outline = shape_outline(&cells, grid.origin(), rules.cell_size, rules.gap);
            let polygon =
                FlatPolygon::new(LayerKey::new(0, 0), outline).expect("non-degenerate shape");
            shapes.push(ArtPolyomino {
                kind: *kind,
                cells,
                polygon,
            });
        }
    }
    Ok(shapes)
}

/// Drawn metal area of `shape` inside lattice cell `(c, r)`'s pitch square:
/// the square itself plus the bridges and corner fill it owns.
fn cell_area(cells: &BTreeSet<(usize, usize)>, c: usize, r: usize, rules: &ArtRules) -> i64 {
    let (s, g) = (rules.cell_size, rules.gap);
    let right = cells.contains(&(c + 1, r));
    let up = cells.contains(&(c, r + 1));
    let mut a = s * s;
    if right {
        a += s * g;
    }
    if up {
        a += s * g;
    }
    if right && up && cells.contains(&(c + 1, r + 1)) {
        a += g * g;
    }
    a
}

/// Drops whole shapes until every density window is at or under
/// `max_density`. The window with the largest overshoot is fixed first, by
/// removing its lowest-priority shape; priorities come from a ChaCha8
/// stream seeded with `rules.seed`.
pub fn thin_density(
    shapes: Vec<ArtPolyomino>,
    grid: &InkGrid,
    rules: &ArtRules,
) -> Vec<ArtPolyomino> {
    let (cols, rows) = (grid.cols(), grid.rows());
    let w = rules.density_window;
    let (nwc, nwr) = window_counts(cols, rows, w);
    let side = w as i64 * rules.pitch();
    let limit = (rules.max_density * (side * side) as f64).floor() as i64;

    let mut rng = ChaCha8Rng::seed_from_u64(rules.seed);
    let priority: Vec<u64> = shapes.iter().map(|_| rng.next_u64()).collect();

    let mut owner: Vec<Option<usize>> = vec![None; cols * rows];
    let mut area = vec![0i64; cols * rows];
    for (i, s) in shapes.iter().enumerate() {
        let set: BTreeSet<(usize, usize)> = s.cells.iter().copied().collect();
        for &(c, r) in &s.cells {
            owner[r * cols + c] = Some(i);
            area[r * cols + c] = cell_area(&set, c, r, rules);
        }
    }

    // window sums from a 2D prefix table
    let mut pre = vec![0i64; (cols + 1) * (rows + 1)];
    for r in 0..rows {
        for c in 0..cols {
            pre[(r + 1) * (cols + 1) + c + 1] =
                area[r * cols + c] + pre[r * (cols + 1) + c + 1] + pre[(r + 1) * (cols + 1) + c]
                    - pre[r * (cols + 1) + c];
        }
    }
    let rect_sum = |c0: usize, r0: usize, c1: usize, r1: usize| {
        pre[r1 * (cols + 1) + c1] - pre[r0 * (cols + 1) + c1] - pre[r1 * (cols + 1) + c0]
            + pre[r0 * (cols + 1) + c0]
    };
    let mut sums = vec![0i64; nwc * nwr];
    let mut over: BTreeSet<(Reverse<i64>, usize)> = BTreeSet::new();
    for wr in 0..nwr {
        for wc in 0..nwc {
            let i = wr * nwc + wc;
            sums[i] = rect_sum(wc, wr, (wc + w).min(cols), (wr + w).min(rows));
            if sums[i] > limit {
                over.insert((Reverse(sums[i] - limit), i));
            }
        }
    }

    let mut alive = vec![true; shapes.len()];
    while let Some(&(_, wi)) = over.iter().next() {
        let (wc, wr) = (wi % nwc, wi / nwc);
        let victim = (wr..(wr + w).min(rows))
            .flat_map(|r| (wc..(wc + w).min(cols)).map(move |c| (c, r)))
            .filter_map(|(c, r)| owner[r * cols + c])
            .min_by_key(|&s| (priority[s], s))
            .expect("overfull window holds a shape");
        alive[victim] = false;
        for &(c, r) in &shapes[victim].cells {
            let a = area[r * cols + c];
            owner[r * cols + c] = None;
            area[r * cols + c] = 0;
            let wc_lo = (c + 1).saturating_sub(w);
            let wr_lo = (r + 1).saturating_sub(w);
            for wr in wr_lo..=r.min(nwr - 1) {
                for wc in wc_lo..=c.min(nwc - 1) {
                    let i = wr * nwc + wc;
                    if sums[i] > limit {
                        over.remove(&(Reverse(sums[i] - limit), i));
                    }
                    sums[i] -= a;
                    if sums[i] > limit {
                        over.insert((Reverse(sums[i] - limit), i));
                    }
                }
            }
        }
    }

    shapes
        .into_iter()
        .zip(alive)
        .filter_map(|(s, keep)| keep.then_some(s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{check_drc, ShapeKind};
    use super::*;
    use crate::coord::Rect;

    fn grid(cols: usize, rows: usize, ink: &[(usize, usize)], rules: &ArtRules) -> InkGrid {
        let mut g = BitGrid::new(cols, rows);
        for &(c, r) in ink {
            g.set(c, r, true);
        }
        let p = rules.pitch();
        InkGrid {
            ink: g,
            placement: Rect::new(0, 0, cols as i64 * p, rows as i64 * p),
            pitch: p,
        }
    }

    fn full(cols: usize, rows: usize) -> Vec<(usize, usize)> {
        (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (c, r)))
            .collect()
    }

    #[test]
    fn no_ink_no_art() {
        let rules = ArtRules::new(20, 5);
        let g = grid(4, 4, &[], &rules);
        assert!(generate_art(&g, &g.empty_occupancy(), &rules)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn isolated_cell_obeys_min_cells() {
        let mut rules = ArtRules::new(20, 5);
        let g = grid(4, 4, &[(1, 1)], &rules);
        let occ = g.empty_occupancy();
        let one = generate_art(&g, &occ, &rules).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].kind, ShapeKind::Mono);
        assert_eq!(one[0].polygon.bbox, Rect::new(25, 25, 45, 45));
        rules.min_cells = 2;
        assert!(generate_art(&g, &occ, &rules).unwrap().is_empty());
    }

    #[test]
    fn two_by_two_block_is_one_o() {
        let rules = ArtRules::new(20, 5);
        let g = grid(4, 4, &[(1, 1), (2, 1), (1, 2), (2, 2)], &rules);
        let occ = g.empty_occupancy();
        let art = generate_art(&g, &occ, &rules).unwrap();
        assert_eq!(art.len(), 1);
        assert_eq!(art[0].kind, ShapeKind::O);
        assert_eq!(art[0].polygon.vertices.len(), 4);
        assert_eq!(art[0].polygon.bbox, Rect::new(25, 25, 70, 70));
        assert!(check_drc(&art, &occ, &rules).is_clean());
    }

    #[test]
    fn occupied_cell_is_avoided() {
        let rules = ArtRules::new(20, 5);
        let g = grid(6, 5, &full(6, 5), &rules);
        let mut occ = g.empty_occupancy();
        occ.occupied.set(3, 2, true);
        let art = generate_art(&g, &occ, &rules).unwrap();
        assert!(art.iter().all(|s| !s.cells.contains(&(3, 2))));
        let covered: usize = art.iter().map(|s| s.cells.len()).sum();
        assert_eq!(covered, 29);
        assert!(check_drc(&art, &occ, &rules).is_clean());
    }

    #[test]
    fn thinning_meets_density_and_is_seeded() {
        let mut rules = ArtRules::new(20, 5);
        rules.density_window = 4;
        rules.max_density = 0.4;
        let g = grid(12, 12, &full(12, 12), &rules);
        let occ = g.empty_occupancy();
        let a = generate_art(&g, &occ, &rules).unwrap();
        assert!(check_drc(&a, &occ, &rules).is_clean());
        assert_eq!(a, generate_art(&g, &occ, &rules).unwrap());
        rules.seed = 7;
        let b = generate_art(&g, &occ, &rules).unwrap();
        assert!(check_drc(&b, &occ, &rules).is_clean());
        assert_ne!(a, b);
    }

    #[test]
    fn grid_smaller_than_window() {
        let mut rules = ArtRules::new(20, 5);
        rules.density_window = 10;
        rules.max_density = 0.05;
        let g = grid(3, 3, &full(3, 3), &rules);
        let occ = g.empty_occupancy();
        let art = generate_art(&g, &occ, &rules).unwrap();
        let area: f64 = art.iter().map(|s| s.polygon.area()).sum();
        assert!(area <= 0.05 * 250.0 * 250.0);
        assert!(check_drc(&art, &occ, &rules).is_clean());
    }
}
