// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use crate::coord::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    O,
    I,
    L,
    J,
    T,
    S,
    Z,
    I3,
    L3,
    Domino,
    Mono,
}

impl ShapeKind {
    pub const PREFERENCE: [ShapeKind; 11] = [
        ShapeKind::O,
        ShapeKind::I,
        ShapeKind::L,
        ShapeKind::J,
        ShapeKind::T,
        ShapeKind::S,
        ShapeKind::Z,
        ShapeKind::I3,
        ShapeKind::L3,
        ShapeKind::Domino,
        ShapeKind::Mono,
    ];

    fn base(self) -> &'static [(i32, i32)] {
        match self {
            ShapeKind::O => &[(0, 0), (1, 0), (0, 1), (1, 1)],
            ShapeKind::I => &[(0, 0), (1, 0), (2, 0), (3, 0)],
            ShapeKind::L => &[(0, 0), (1, 0), (0, 1), (0, 2)],
            ShapeKind::J => &[(0, 0), (1, 0), (1, 1), (1, 2)],
            ShapeKind::T => &[(0, 0), (1, 0), (2, 0), (1, 1)],
            ShapeKind::S => &[(0, 0), (1, 0), (1, 1), (2, 1)],
            ShapeKind::Z => &[(1, 0), (2, 0), (0, 1), (1, 1)],
            ShapeKind::I3 => &[(0, 0), (1, 0), (2, 0)],
            ShapeKind::L3 => &[(0, 0), (1, 0), (0, 1)],
            ShapeKind::Domino => &[(0, 0), (1, 0)],
            ShapeKind::Mono => &[(0, 0)],
        }
    }

    pub fn size(self) -> usize {
        self.base().len()
    }
}

/// Cell offsets relative to the shape's first cell in scan order (lowest
/// row, then lowest column), so every other offset comes later in the scan.
pub type Orientation = Vec<(i32, i32)>;

fn normalize(mut cells: Vec<(i32, i32)>) -> Orientation {
    cells.sort_by_key(|&(c, r)| (r, c));
    let (ac, ar) = cells[0];
    cells.iter().map(|&(c, r)| (c - ac, r - ar)).collect()
}

/// Distinct orientations of a shape: the base, then successive 90° turns.
pub fn orientations(kind: ShapeKind) -> Vec<Orientation> {
    let mut out: Vec<Orientation> = Vec::new();
    let mut cur: Vec<(i32, i32)> = kind.base().to_vec();
    for _ in 0..4 {
        let n = normalize(cur.clone());
        if !out.contains(&n) {
            out.push(n);
        }
        cur = cur.iter().map(|&(c, r)| (-r, c)).collect();
    }
    out
}

/// All placement candidates whose size lies in `min..=max`, in preference order.
pub fn shape_catalog(min_cells: usize, max_cells: usize) -> Vec<(ShapeKind, Orientation)> {
    ShapeKind::PREFERENCE
        .iter()
        .filter(|k| (min_cells..=max_cells).contains(&k.size()))
        .flat_map(|&k| orientations(k).into_iter().map(move |o| (k, o)))
        .collect()
}

/// Outline of a set of lattice cells with gutter bridges between member
/// neighbours, as a counter-clockwise vertex list without collinear points.
///
/// The lattice is refined 2x: even sub-columns are drawn squares of width
/// `cell_size`, odd ones are gutters of width `gap`.
pub fn shape_outline(
    cells: &[(usize, usize)],
    origin: Point,
    cell_size: i64,
    gap: i64,
) -> Vec<Point> {
    let set: BTreeSet<(usize, usize)> = cells.iter().copied().collect();
    let has = |c: usize, r: usize| set.contains(&(c, r));
    let mut subs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(c, r) in cells {
        subs.insert((2 * c, 2 * r));
        if has(c + 1, r) {
            subs.insert((2 * c + 1, 2 * r));
        }
        if has(c, r + 1) {
            subs.insert((2 * c, 2 * r + 1));
        }
        if has(c + 1, r) && has(c, r + 1) && has(c + 1, r + 1) {
            subs.insert((2 * c + 1, 2 * r + 1));
        }
    }

    // directed boundary edges, interior on the left
    let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    let mut add = |a: (usize, usize), b: (usize, usize)| edges.entry(a).or_default().push(b);
    for &(x, y) in &subs {
        if x == 0 || !subs.contains(&(x - 1, y)) {
            add((x, y + 1), (x, y));
        }
        if !subs.contains(&(x + 1, y)) {
            add((x + 1, y), (x + 1, y + 1));
        }
        if y == 0 || !subs.contains(&(x, y - 1)) {
            add((x, y), (x + 1, y));
        }
        if !subs.contains(&(x, y + 1)) {
            add((x + 1, y + 1), (x, y + 1));
        }
    }

    let start = *edges.keys().next().expect("nonempty shape");
    let mut loop_pts = vec![start];
    let mut cur = start;
    loop {
        let next = {
            let outs = edges.get_mut(&cur).expect("closed boundary");
            outs.pop().expect("unused edge")
        };
        if next == start {
            break;
        }
        loop_pts.push(next);
        cur = next;
    }

    let lattice = |k: usize| (k / 2) as i64 * (cell_size + gap) + (k % 2) as i64 * cell_size;
    let n = loop_pts.len();
    (0..n)
        .filter(|&i| {
            let p = loop_pts[(i + n - 1) % n];
            let q = loop_pts[i];
            let r = loop_pts[(i + 1) % n];
            let d1 = (q.0 as i64 - p.0 as i64, q.1 as i64 - p.1 as i64);
            let d2 = (r.0 as i64 - q.0 as i64, r.1 as i64 - q.1 as i64);
            d1.0 * d2.1 - d1.1 * d2.0 != 0
        })
        .map(|i| {
            let (x, y) = loop_pts[i];
            Point::new(origin.x + lattice(x), origin.y + lattice(y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_orientation_counts() {
        let counts: Vec<usize> = ShapeKind::PREFERENCE
            .iter()
            .map(|&k| orientations(k).len())
            .collect();
        assert_eq!(counts, vec![1, 2, 4, 4, 4, 2, 2, 2, 4, 2, 1]);
    }

    #[test]
    fn anchor_is_first_in_scan_order() {
        for (_, o) in shape_catalog(1, 4) {
            assert_eq!(o[0], (0, 0));
            assert!(o[1..].iter().all(|&(c, r)| r > 0 || (r == 0 && c > 0)));
        }
    }

    #[test]
    fn catalog_respects_size_limits() {
        assert_eq!(shape_catalog(1, 4).len(), 19 + 6 + 2 + 1);
        assert!(shape_catalog(2, 3)
            .iter()
            .all(|(k, _)| (2..=3).contains(&k.size())));
    }

    #[test]
    fn o_tetromino_is_one_square() {
        let cells = [(0, 0), (1, 0), (0, 1), (1, 1)];
        let pts = shape_outline(&cells, Point::new(100, 200), 20, 5);
        assert_eq!(
            pts,
            vec![
                Point::new(100, 200),
                Point::new(145, 200),
                Point::new(145, 245),
                Point::new(100, 245)
            ]
        );
    }

    #[test]
    fn l_tromino_has_six_corners() {
        let cells = [(0, 0), (1, 0), (0, 1)];
        let pts = shape_outline(&cells, Point::new(0, 0), 20, 5);
        assert_eq!(pts.len(), 6);
        let poly = crate::geom::FlatPolygon::new(crate::gdsii::LayerKey::new(0, 0), pts).unwrap();
        assert!(poly.signed_area2() > 0);
        // three squares plus two bridges
        assert_eq!(poly.area(), (3 * 400 + 2 * 100) as f64);
    }

    #[test]
    fn monomino_is_drawn_square() {
        let pts = shape_outline(&[(3, 1)], Point::new(0, 0), 20, 5);
        assert_eq!(
            pts,
            vec![
                Point::new(75, 25),
                Point::new(95, 25),
                Point::new(95, 45),
                Point::new(75, 45)
            ]
        );
    }
}
