// SPDX-License-Identifier: Apache-2.0

//! PATH expansion into area polygons.
//!
//! Each segment becomes its own quadrilateral; interior vertices get a
//! miter (or bevel) wedge on the outer side of the turn, and round paths
//! get half-16-gon caps. The pieces overlap, which is fine because the
//! rasterizer fills the union.

use super::{Affine, FlatPolygon};
use crate::gdsii::PathElement;

const CAP_SEGMENTS: usize = 8;

/// Outline pieces in local (untransformed) floating-point coordinates.
pub fn path_outlines(path: &PathElement) -> Vec<Vec<(f64, f64)>> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(path.points.len());
    for p in &path.points {
        let q = (p.x as f64, p.y as f64);
        if pts.last() != Some(&q) {
            pts.push(q);
        }
    }
    if path.width <= 0 || pts.len() < 2 {
        return Vec::new();
    }
    let hw = path.width as f64 / 2.0;
    let dirs: Vec<(f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            let len = dx.hypot(dy);
            (dx / len, dy / len)
        })
        .collect();
    let last = dirs.len() - 1;
    let mut out = Vec::new();

    for (i, (seg, &(ux, uy))) in pts.windows(2).zip(&dirs).enumerate() {
        let (mut a, mut b) = (seg[0], seg[1]);
        if path.pathtype == 2 {
            if i == 0 {
                a = (a.0 - ux * hw, a.1 - uy * hw);
            }
            if i == last {
                b = (b.0 + ux * hw, b.1 + uy * hw);
            }
        }
        let (nx, ny) = (-uy * hw, ux * hw);
        out.push(vec![
            (a.0 - nx, a.1 - ny),
            (b.0 - nx, b.1 - ny),
            (b.0 + nx, b.1 + ny),
            (a.0 + nx, a.1 + ny),
        ]);
    }

    for (k, p) in pts.iter().enumerate().skip(1).take(pts.len() - 2) {
        if let Some(j) = join(*p, dirs[k - 1], dirs[k], hw, path.width as f64) {
            out.push(j);
        }
    }

    if path.pathtype == 1 {
        let (ux, uy) = dirs[0];
        out.push(cap(pts[0], (-ux, -uy), hw));
        let (ux, uy) = dirs[last];
        out.push(cap(pts[pts.len() - 1], (ux, uy), hw));
    }
    out
}

/// Wedge filling the outer side of a turn at `p`.
fn join(
    p: (f64, f64),
    u1: (f64, f64),
    u2: (f64, f64),
    hw: f64,
    max_miter: f64,
) -> Option<Vec<(f64, f64)>> {
    let cross = u1.0 * u2.1 - u1.1 * u2.0;
    if cross.abs() < 1e-12 {
        return None;
    }
    // outer side is to the right of a left turn and vice versa
    let side = if cross > 0.0 { -1.0 } else { 1.0 };
    let n1 = (-u1.1 * side, u1.0 * side);
    let n2 = (-u2.1 * side, u2.0 * side);
    let e1 = (p.0 + n1.0 * hw, p.1 + n1.1 * hw);
    let e2 = (p.0 + n2.0 * hw, p.1 + n2.1 * hw);
    let (sx, sy) = (n1.0 + n2.0, n1.1 + n2.1);
    let half_cos = sx.hypot(sy) / 2.0;
    let miter_len = if half_cos > 0.0 {
        hw / half_cos
    } else {
        f64::INFINITY
    };
    if miter_len <= max_miter {
        let norm = sx.hypot(sy);
        let m = (p.0 + sx / norm * miter_len, p.1 + sy / norm * miter_len);
        Some(vec![p, e1, m, e2])
    } else {
        Some(vec![p, e1, e2])
    }
}

/// Half of a 16-gon around `center`, bulging towards `out_dir`.
fn cap(center: (f64, f64), out_dir: (f64, f64), hw: f64) -> Vec<(f64, f64)> {
    let base = out_dir.1.atan2(out_dir.0) + std::f64::consts::FRAC_PI_2;
    (0..=CAP_SEGMENTS)
        .map(|k| {
            let ang = base - k as f64 * std::f64::consts::PI / CAP_SEGMENTS as f64;
            (center.0 + hw * ang.cos(), center.1 + hw * ang.sin())
        })
        .collect()
}

/// Expands a path into rounded polygons in its own coordinate system.
pub fn path_to_polygon(path: &PathElement) -> Vec<FlatPolygon> {
    path_outlines(path)
        .into_iter()
        .filter_map(|o| {
            let pts = o
                .iter()
                .map(|&(x, y)| Affine::IDENTITY.apply_round(x, y))
                .collect();
            FlatPolygon::new(path.key, pts)
        })
        .collect()
}
