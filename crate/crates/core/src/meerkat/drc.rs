// SPDX-License-Identifier: Apache-2.0

//! Rule checks computed from the shape polygons alone, sharing nothing with
//! the generator but the window layout.

use super::{ArtPolyomino, ArtRules};
use crate::coord::{Point, Rect};
use crate::exec::Exec;
use crate::geom::{FlatPolygon, OccupancyGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Two shapes closer than `gap` (0 when they touch or overlap).
    Spacing { a: usize, b: usize, distance: f64 },
    /// Interior span between facing edges narrower than `cell_size`.
    Width { shape: usize, width: i64, at: Point },
    /// Shape metal inside an occupied lattice cell.
    Occupancy {
        shape: usize,
        cell: (usize, usize),
        area: f64,
    },
    /// Art area in a density window above `max_density`.
    Density { window: Rect, density: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DrcReport {
    pub violations: Vec<Violation>,
    pub pairs_checked: usize,
    pub windows_checked: usize,
}

impl DrcReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn spacing(&self) -> usize {
        self.count(|v| matches!(v, Violation::Spacing { .. }))
    }

    pub fn width(&self) -> usize {
        self.count(|v| matches!(v, Violation::Width { .. }))
    }

    pub fn occupancy(&self) -> usize {
        self.count(|v| matches!(v, Violation::Occupancy { .. }))
    }

    pub fn density(&self) -> usize {
        self.count(|v| matches!(v, Violation::Density { .. }))
    }

    fn count(&self, f: impl Fn(&Violation) -> bool) -> usize {
        self.violations.iter().filter(|v| f(v)).count()
    }
}

/// Number of window positions along each axis. A grid narrower than the
/// window gets a single window anchored at its origin.
pub(crate) fn window_counts(cols: usize, rows: usize, w: usize) -> (usize, usize) {
    let n = |len: usize| if len >= w { len - w + 1 } else { 1 };
    (n(cols), n(rows))
}

/// Every density window over the lattice, in dbu, row-major from the bottom.
pub fn density_windows(occ: &OccupancyGrid, window: usize) -> Vec<Rect> {
    let (nwc, nwr) = window_counts(occ.cols(), occ.rows(), window);
    let side = window as i64 * occ.pitch;
    (0..nwr)
        .flat_map(|r| (0..nwc).map(move |c| (c, r)))
        .map(|(c, r)| {
            let x = occ.origin.x + c as i64 * occ.pitch;
            let y = occ.origin.y + r as i64 * occ.pitch;
            Rect::new(x, y, x + side, y + side)
        })
        .collect()
}

pub fn check_drc(shapes: &[ArtPolyomino], occ: &OccupancyGrid, rules: &ArtRules) -> DrcReport {
    check_drc_with(Exec::default(), shapes, occ, rules)
}

pub fn check_drc_with(
    exec: Exec,
    shapes: &[ArtPolyomino],
    occ: &OccupancyGrid,
    rules: &ArtRules,
) -> DrcReport {
    let mut report = DrcReport::default();

    // spacing: sweep over bboxes sorted by x0
    let mut order: Vec<usize> = (0..shapes.len()).collect();
    order.sort_by_key(|&i| (shapes[i].bbox().x0, i));
    let gap = rules.gap;
    let per_shape = exec.map_range(order.len(), |k| {
        let i = order[k];
        let bi = shapes[i].bbox().expand(gap);
        let mut found = Vec::new();
        let mut pairs = 0;
        for &j in &order[k + 1..] {
            let bj = shapes[j].bbox();
            if bj.x0 >= bi.x1 {
                break;
            }
            if bj.y0 >= bi.y1 || bj.y1 <= bi.y0 {
                continue;
            }
            pairs += 1;
            if let Some(d) = closer_than(&shapes[i].polygon, &shapes[j].polygon, gap) {
                let (a, b) = (i.min(j), i.max(j));
                found.push(Violation::Spacing { a, b, distance: d });
            }
        }
        (found, pairs)
    });
    let mut spacing = Vec::new();
    for (v, p) in per_shape {
        spacing.extend(v);
        report.pairs_checked += p;
    }
    spacing.sort_by_key(|v| match v {
        Violation::Spacing { a, b, .. } => (*a, *b),
        _ => unreachable!(),
    });
    report.violations.extend(spacing);

    for (i, s) in shapes.iter().enumerate() {
        report
            .violations
            .extend(
                min_width(&s.polygon, rules.cell_size)
                    .into_iter()
                    .map(|(width, at)| Violation::Width {
                        shape: i,
                        width,
                        at,
                    }),
            );
    }

    for (i, s) in shapes.iter().enumerate() {
        report
            .violations
            .extend(
                occupied_overlap(&s.polygon, occ)
                    .into_iter()
                    .map(|(cell, area)| Violation::Occupancy {
                        shape: i,
                        cell,
                        area,
                    }),
            );
    }

    let windows = density_windows(occ, rules.density_window);
    report.windows_checked = windows.len();
    let density = exec.map(&windows, |w| {
        let wa = (w.width() * w.height()) as f64;
        let area: f64 = shapes
            .iter()
            .filter(|s| s.bbox().overlaps(w))
            .map(|s| polygon_area(&clip_to_rect(&s.polygon, w)))
            .sum();
        (area > rules.max_density * wa).then(|| Violation::Density {
            window: *w,
            density: area / wa,
        })
    });
    report.violations.extend(density.into_iter().flatten());
    report
}

fn orient(a: Point, b: Point, c: Point) -> i128 {
    let (bx, by) = ((b.x - a.x) as i128, (b.y - a.y) as i128);
    let (cx, cy) = ((c.x - a.x) as i128, (c.y - a.y) as i128);
    (bx * cy - by * cx).signum()
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (o1, o2, o3, o4) = (
        orient(a, b, c),
        orient(a, b, d),
        orient(c, d, a),
        orient(c, d, b),
    );
    if o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// Squared point-segment distance as an exact fraction `num / den`.
fn point_segment_d2(p: Point, a: Point, b: Point) -> (i128, i128) {
    let (dx, dy) = ((b.x - a.x) as i128, (b.y - a.y) as i128);
    let (px, py) = ((p.x - a.x) as i128, (p.y - a.y) as i128);
    let len2 = dx * dx + dy * dy;
    let dot = px * dx + py * dy;
    if len2 == 0 || dot <= 0 {
        return (px * px + py * py, 1);
    }
    if dot >= len2 {
        let (qx, qy) = ((p.x - b.x) as i128, (p.y - b.y) as i128);
        return (qx * qx + qy * qy, 1);
    }
    let cross = px * dy - py * dx;
    (cross * cross, len2)
}

fn inside(poly: &FlatPolygon, p: Point) -> bool {
    let mut winding = 0i32;
    for (a, b) in poly.edges() {
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0 {
                winding += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// `Some(distance)` when the polygons are closer than `limit`.
fn closer_than(p: &FlatPolygon, q: &FlatPolygon, limit: i64) -> Option<f64> {
    for (a, b) in p.edges() {
        for (c, d) in q.edges() {
            if segments_touch(a, b, c, d) {
                return Some(0.0);
            }
        }
    }
    if inside(q, p.vertices[0]) || inside(p, q.vertices[0]) {
        return Some(0.0);
    }
    let mut best = (i128::MAX, 1i128);
    let mut consider = |f: (i128, i128)| {
        if f.0 * best.1 < best.0 * f.1 {
            best = f;
        }
    };
    for (a, b) in p.edges() {
        for (c, d) in q.edges() {
            consider(point_segment_d2(a, c, d));
            consider(point_segment_d2(b, c, d));
            consider(point_segment_d2(c, a, b));
            consider(point_segment_d2(d, a, b));
        }
    }
    let lim2 = limit as i128 * limit as i128;
    (best.0 < lim2 * best.1).then(|| (best.0 as f64 / best.1 as f64).sqrt())
}

/// Facing axis-parallel edge pairs with the interior between them and a
/// span below `min`, reported once per edge as the narrowest such span.
fn min_width(poly: &FlatPolygon, min: i64) -> Vec<(i64, Point)> {
    let ccw = poly.signed_area2() > 0;
    // (fixed coordinate, lo, hi) of edges whose interior lies on the + side / - side
    let mut h_up = Vec::new();
    let mut h_down = Vec::new();
    let mut v_right = Vec::new();
    let mut v_left = Vec::new();
    for (a, b) in poly.edges() {
        let (a, b) = if ccw { (a, b) } else { (b, a) };
        if a.y == b.y && a.x != b.x {
            let span = (a.y, a.x.min(b.x), a.x.max(b.x));
            if b.x > a.x {
                h_up.push(span);
            } else {
                h_down.push(span);
            }
        } else if a.x == b.x && a.y != b.y {
            let span = (a.x, a.y.min(b.y), a.y.max(b.y));
            if b.y < a.y {
                v_right.push(span);
            } else {
                v_left.push(span);
            }
        }
    }
    let mut out = Vec::new();
    let mut scan = |lows: &[(i64, i64, i64)], highs: &[(i64, i64, i64)], horizontal: bool| {
        for &(k1, lo1, hi1) in lows {
            let nearest = highs
                .iter()
                .filter(|&&(k2, lo2, hi2)| k2 > k1 && lo1.max(lo2) < hi1.min(hi2))
                .map(|&(k2, _, _)| k2 - k1)
                .min();
            if let Some(w) = nearest.filter(|&w| w < min) {
                let at = if horizontal {
                    Point::new(lo1, k1)
                } else {
                    Point::new(k1, lo1)
                };
                out.push((w, at));
            }
        }
    };
    scan(&h_up, &h_down, true);
    scan(&v_right, &v_left, false);
    out
}

fn occupied_overlap(poly: &FlatPolygon, occ: &OccupancyGrid) -> Vec<((usize, usize), f64)> {
    let b = poly.bbox;
    let p = occ.pitch;
    let c0 = (b.x0 - occ.origin.x).div_euclid(p).max(0);
    let c1 = ((b.x1 - occ.origin.x).div_euclid(p) + 1).min(occ.cols() as i64);
    let r0 = (b.y0 - occ.origin.y).div_euclid(p).max(0);
    let r1 = ((b.y1 - occ.origin.y).div_euclid(p) + 1).min(occ.rows() as i64);
    let mut out = Vec::new();
    for r in r0..r1 {
        for c in c0..c1 {
            let (c, r) = (c as usize, r as usize);
            if !occ.is_occupied(c, r) {
                continue;
            }
            let area = polygon_area(&clip_to_rect(poly, &occ.cell_rect(c, r)));
            if area > 0.0 {
                out.push(((c, r), area));
            }
        }
    }
    out
}

/// Sutherland-Hodgman clip of a polygon to an axis-aligned rectangle.
fn clip_to_rect(poly: &FlatPolygon, r: &Rect) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = poly
        .vertices
        .iter()
        .map(|p| (p.x as f64, p.y as f64))
        .collect();
    let planes: [(usize, f64, bool); 4] = [
        (0, r.x0 as f64, true),
        (0, r.x1 as f64, false),
        (1, r.y0 as f64, true),
        (1, r.y1 as f64, false),
    ];
    for (axis, bound, keep_above) in planes {
        if pts.is_empty() {
            break;
        }
        let coord = |p: &(f64, f64)| if axis == 0 { p.0 } else { p.1 };
        let ins = |p: &(f64, f64)| {
            if keep_above {
                coord(p) >= bound
            } else {
                coord(p) <= bound
            }
        };
        let mut out = Vec::with_capacity(pts.len() + 4);
        for i in 0..pts.len() {
            let cur = pts[i];
            let prev = pts[(i + pts.len() - 1) % pts.len()];
            let (ci, pi) = (ins(&cur), ins(&prev));
            if ci != pi {
                let t = (bound - coord(&prev)) / (coord(&cur) - coord(&prev));
                out.push((prev.0 + t * (cur.0 - prev.0), prev.1 + t * (cur.1 - prev.1)));
            }
            if ci {
                out.push(cur);
            }
        }
        pts = out;
    }
    pts
}

fn polygon_area(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() / 2.0
}

#[cfg(test)]
mod tests {
    use super::super::ShapeKind;
    use super::*;
    use crate::gdsii::LayerKey;

    fn square(x: i64, y: i64, s: i64) -> ArtPolyomino {
        ArtPolyomino {
            kind: ShapeKind::Mono,
            cells: vec![],
            polygon: FlatPolygon::rect(LayerKey::new(0, 0), Rect::new(x, y, x + s, y + s)).unwrap(),
        }
    }

    fn occ(cols: usize, rows: usize, pitch: i64) -> OccupancyGrid {
        OccupancyGrid::empty(Point::new(0, 0), pitch, cols, rows)
    }

    #[test]
    fn spacing_boundary_is_inclusive() {
        let rules = ArtRules::new(20, 5);
        let o = occ(4, 4, 25);
        let ok = [square(0, 0, 20), square(25, 0, 20)];
        assert!(check_drc(&ok, &o, &rules).is_clean());
        let close = [square(0, 0, 20), square(24, 0, 20)];
        let rep = check_drc(&close, &o, &rules);
        assert_eq!(rep.spacing(), 1);
        assert_eq!(
            rep.violations[0],
            Violation::Spacing {
                a: 0,
                b: 1,
                distance: 4.0
            }
        );
    }

    #[test]
    fn diagonal_spacing_uses_euclidean_distance() {
        let rules = ArtRules::new(20, 5);
        let o = occ(4, 4, 25);
        // corner to corner sqrt(3^2 + 4^2) = 5
        let ok = [square(0, 0, 20), square(23, 24, 20)];
        assert!(check_drc(&ok, &o, &rules).is_clean());
        let bad = [square(0, 0, 20), square(23, 23, 20)];
        assert_eq!(check_drc(&bad, &o, &rules).spacing(), 1);
    }

    #[test]
    fn nested_shapes_are_distance_zero() {
        let rules = ArtRules::new(5, 5);
        let o = occ(8, 8, 10);
        let rep = check_drc(&[square(0, 0, 60), square(20, 20, 5)], &o, &rules);
        assert_eq!(
            rep.violations[0],
            Violation::Spacing {
                a: 0,
                b: 1,
                distance: 0.0
            }
        );
    }

    #[test]
    fn narrow_shape_flags_width() {
        let rules = ArtRules::new(20, 5);
        let o = occ(4, 4, 25);
        let thin = ArtPolyomino {
            polygon: FlatPolygon::rect(LayerKey::new(0, 0), Rect::new(0, 0, 40, 19)).unwrap(),
            ..square(0, 0, 1)
        };
        let rep = check_drc(&[thin], &o, &rules);
        assert_eq!(rep.width(), 1);
        assert!(matches!(
            rep.violations[0],
            Violation::Width { width: 19, .. }
        ));
    }

    #[test]
    fn occupancy_needs_interior_overlap() {
        let rules = ArtRules::new(20, 5);
        let mut o = occ(4, 4, 25);
        o.occupied.set(1, 0, true);
        assert!(check_drc(&[square(5, 0, 20)], &o, &rules).is_clean());
        let rep = check_drc(&[square(6, 0, 20)], &o, &rules);
        assert_eq!(
            rep.violations,
            vec![Violation::Occupancy {
                shape: 0,
                cell: (1, 0),
                area: 20.0
            }]
        );
    }

    #[test]
    fn density_window_brute_force() {
        let mut rules = ArtRules::new(20, 5);
        rules.density_window = 2;
        rules.max_density = 0.5;
        let o = occ(3, 3, 25);
        // 2x2 windows of 50x50 = 2500; one square is 400, an O block is 2025
        let big = ArtPolyomino {
            polygon: FlatPolygon::rect(LayerKey::new(0, 0), Rect::new(0, 0, 45, 45)).unwrap(),
            ..square(0, 0, 1)
        };
        let rep = check_drc(&[big], &o, &rules);
        assert_eq!(rep.windows_checked, 4);
        // only the window at the origin holds more than 1250
        assert_eq!(rep.density(), 1);
    }

    #[test]
    fn clip_area() {
        let p = FlatPolygon::rect(LayerKey::new(0, 0), Rect::new(0, 0, 10, 10)).unwrap();
        assert_eq!(
            polygon_area(&clip_to_rect(&p, &Rect::new(5, 5, 20, 20))),
            25.0
        );
        assert_eq!(
            polygon_area(&clip_to_rect(&p, &Rect::new(10, 0, 20, 20))),
            0.0
        );
    }
}
