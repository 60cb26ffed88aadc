// SPDX-License-Identifier: Apache-2.0

//! Generators and brute-force oracles shared by integration and acceptance tests.

#![allow(dead_code)]

use artistic_core::compose::{LayerStyle, Rgb};
use artistic_core::gdsii::record::RawRecord;
use artistic_core::gdsii::{
    ARef, Boundary, GdsDates, GdsElement, GdsStructure, GdsTransform, GdsUnits, PathElement, SRef,
};
use artistic_core::geom::build_occupancy;
use artistic_core::geom::{FlatPolygon, OccupancyGrid};
use artistic_core::meerkat::{map_logo_to_grid, ArtPolyomino, ArtRules, BwImage, InkGrid};
use artistic_core::raster::{CoverageTile, RenderFrame, TileRect};
use artistic_core::{GdsLibrary, LayerKey, Point, Rect};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- GDSII

fn name(rng: &mut TestRng, prefix: &str, i: usize) -> String {
    let tail: String = (0..rng.random_range(0..6))
        .map(|_| rng.random_range(b'A'..=b'Z') as char)
        .collect();
    format!("{prefix}{i}_{tail}")
}

fn point(rng: &mut TestRng, span: i64) -> Point {
    Point::new(
        rng.random_range(-span..=span),
        rng.random_range(-span..=span),
    )
}

fn key(rng: &mut TestRng) -> LayerKey {
    LayerKey::new(rng.random_range(0..256), rng.random_range(0..4))
}

fn transform(rng: &mut TestRng) -> GdsTransform {
    let angle = match rng.random_range(0..6) {
        0 => rng.random_range(0.0..360.0),
        k => [0.0, 90.0, 180.0, 270.0, 45.0][k - 1],
    };
    let magnification = match rng.random_range(0..3) {
        0 => rng.random_range(0.01..20.0),
        _ => 1.0,
    };
    GdsTransform {
        reflect_x: rng.random_bool(0.3),
        magnification,
        angle_deg: angle,
        translate: point(rng, 1_000_000),
    }
}

fn text_element(rng: &mut TestRng) -> GdsElement {
    let s: Vec<u8> = (0..rng.random_range(1..12))
        .map(|_| rng.random_range(b'a'..=b'z'))
        .collect();
    let mut data = s.clone();
    if data.len() % 2 == 1 {
        data.push(0);
    }
    let p = point(rng, 100_000);
    let xy = [p.x as i32, p.y as i32]
        .iter()
        .flat_map(|v| v.to_be_bytes())
        .collect();
    GdsElement::Other(vec![
        RawRecord {
            rtype: 0x0C,
            dtype: 0,
            data: vec![],
        },
        RawRecord {
            rtype: 0x0D,
            dtype: 2,
            data: rng.random_range(0i16..256).to_be_bytes().to_vec(),
        },
        RawRecord {
            rtype: 0x16,
            dtype: 2,
            data: 0i16.to_be_bytes().to_vec(),
        },
        RawRecord {
            rtype: 0x10,
            dtype: 3,
            data: xy,
        },
        RawRecord {
            rtype: 0x19,
            dtype: 6,
            data,
        },
        RawRecord {
            rtype: 0x11,
            dtype: 0,
            data: vec![],
        },
    ])
}

fn element(rng: &mut TestRng, children: &[String]) -> GdsElement {
    let kind = rng.random_range(0..if children.is_empty() { 3 } else { 5 });
    match kind {
        0 => {
            let n = rng.random_range(3..24);
            let mut points: Vec<Point> = (0..n).map(|_| point(rng, 2_000_000)).collect();
            if points[n - 1] == points[0] {
                points[n - 1].x += 1;
            }
            GdsElement::Boundary(Boundary {
                key: key(rng),
                points,
            })
        }
        1 => GdsElement::Path(PathElement {
            key: key(rng),
            width: rng.random_range(0..5000),
            pathtype: [0, 1, 2][rng.random_range(0..3)],
            points: (0..rng.random_range(2..12))
                .map(|_| point(rng, 2_000_000))
                .collect(),
        }),
        2 => text_element(rng),
        3 => GdsElement::SRef(SRef {
            target: children[rng.random_range(0..children.len())].clone(),
            transform: transform(rng),
        }),
        _ => GdsElement::ARef(ARef {
            target: children[rng.random_range(0..children.len())].clone(),
            transform: transform(rng),
            cols: rng.random_range(1..50),
            rows: rng.random_range(1..50),
            col_step: point(rng, 10_000),
            row_step: point(rng, 10_000),
        }),
    }
}

/// Random library: up to 4 hierarchy levels, at most `max_elements` elements.
/// References only point at structures on lower levels.
pub fn random_library(rng: &mut TestRng, max_elements: usize) -> GdsLibrary {
    let units = GdsUnits {
        user_unit_per_dbu: rng.random_range(1e-6..1.0),
        meters_per_dbu: rng.random_range(1e-12..1e-6),
    };
    let mut lib = GdsLibrary::new(name(rng, "LIB", 0), units);
    lib.version = [3, 5, 600][rng.random_range(0..3)];
    lib.dates = GdsDates(std::array::from_fn(|_| rng.random_range(0..3000)));
    let levels = rng.random_range(1..=4);
    let mut budget = rng.random_range(0..=max_elements);
    let mut lower: Vec<String> = Vec::new();
    for level in 0..levels {
        let mut this_level = Vec::new();
        let count = rng.random_range(1..=3);
        for i in 0..count {
            let mut s = GdsStructure::new(name(rng, &format!("L{level}S"), i));
            s.dates = GdsDates(std::array::from_fn(|_| rng.random_range(0..3000)));
            let share = if level + 1 == levels && i + 1 == count {
                budget
            } else {
                rng.random_range(0..=budget)
            };
            budget -= share;
            for _ in 0..share {
                s.elements.push(element(rng, &lower));
            }
            this_level.push(s.name.clone());
            lib.structures.push(s);
        }
        lower.extend(this_level);
    }
    lib
}

// ---------------------------------------------------------------- raster

/// Random scene: rectangles, triangles and arbitrary (possibly
/// self-intersecting) polygons over `area`, all on `layer`.
pub fn random_polygons(
    rng: &mut TestRng,
    layer: LayerKey,
    area: Rect,
    count: usize,
) -> Vec<FlatPolygon> {
    let mut out = Vec::with_capacity(count);
    let span = |rng: &mut TestRng| {
        Point::new(
            rng.random_range(area.x0..=area.x1),
            rng.random_range(area.y0..=area.y1),
        )
    };
    while out.len() < count {
        let poly = match rng.random_range(0..3) {
            0 => {
                let a = span(rng);
                let b = span(rng);
                FlatPolygon::rect(
                    layer,
                    Rect::new(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y)),
                )
            }
            1 => FlatPolygon::new(layer, (0..3).map(|_| span(rng)).collect()),
            _ => FlatPolygon::new(
                layer,
                (0..rng.random_range(4..9)).map(|_| span(rng)).collect(),
            ),
        };
        out.extend(poly);
    }
    out
}

/// Exact nonzero-winding test at the sample point `(sx2 / 2, sy2 / 2)`.
///
/// An edge counts when `y_lo <= y < y_hi` and the point lies on or right of
/// it, so left/bottom boundaries are inside and right/top ones outside.
pub fn winding_at(poly: &FlatPolygon, sx2: i128, sy2: i128) -> i32 {
    let n = poly.vertices.len();
    let mut w = 0;
    for i in 0..n {
        let a = poly.vertices[i];
        let b = poly.vertices[(i + 1) % n];
        if a.y == b.y {
            continue;
        }
        let (lo, hi, dir) = if a.y < b.y { (a, b, 1) } else { (b, a, -1) };
        let (lx2, ly2, hy2) = (2 * lo.x as i128, 2 * lo.y as i128, 2 * hi.y as i128);
        if !(ly2 <= sy2 && sy2 < hy2) {
            continue;
        }
        let dx = (hi.x - lo.x) as i128;
        let dy = (hi.y - lo.y) as i128;
        if (sx2 - lx2) * dy - dx * (sy2 - ly2) >= 0 {
            w += dir;
        }
    }
    w
}

/// Brute-force supersample-1 coverage of a tile. Requires an integer
/// `dbu_per_px` so that pixel centers sit on the half-integer lattice.
pub fn oracle_tile(polys: &[FlatPolygon], frame: &RenderFrame, tile: &TileRect) -> Vec<u8> {
    assert_eq!(frame.supersample, 1);
    let d = frame.dbu_per_px();
    assert_eq!(d.fract(), 0.0, "oracle needs integer dbu per pixel");
    let d = d as i128;
    let x0 = frame.chip_window.x0 as i128;
    let y1 = frame.chip_window.y1 as i128;
    let mut out = vec![0u8; tile.w * tile.h];
    for j in 0..tile.h {
        let sy2 = 2 * y1 - (2 * (tile.y + j) as i128 + 1) * d;
        for i in 0..tile.w {
            let sx2 = 2 * x0 + (2 * (tile.x + i) as i128 + 1) * d;
            if polys.iter().any(|p| winding_at(p, sx2, sy2) != 0) {
                out[j * tile.w + i] = 255;
            }
        }
    }
    out
}

// ---------------------------------------------------------------- meerkat

/// Random logo made of filled discs and bars, `true` = ink.
pub fn random_logo(rng: &mut TestRng, w: usize, h: usize) -> BwImage {
    let mut img = BwImage::new(w, h);
    for _ in 0..rng.random_range(1..6) {
        let cx = rng.random_range(0..w) as i64;
        let cy = rng.random_range(0..h) as i64;
        let r = rng.random_range(1..=(w.min(h) as i64 / 2).max(1));
        let bar = rng.random_bool(0.4);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as i64 - cx, y as i64 - cy);
                let hit = if bar {
                    dx.abs() <= r && dy.abs() <= r / 3
                } else {
                    dx * dx + dy * dy <= r * r
                };
                if hit {
                    img.set(x, y, true);
                }
            }
        }
    }
    img
}

pub fn random_rules(rng: &mut TestRng) -> ArtRules {
    let cell = rng.random_range(200..2000);
    let gap = rng.random_range(100..1000);
    let min_cells = rng.random_range(1..=4u8);
    let max_cells = rng.random_range(min_cells..=4);
    ArtRules {
        cell_size: cell,
        gap,
        min_cells,
        max_cells,
        keepout: rng.random_range(0..500),
        density_window: rng.random_range(1..12),
        max_density: rng.random_range(0.05..=1.0),
        seed: rng.random(),
        min_spacing: Some(gap),
        min_width: Some(cell),
        max_width: Some(2 * cell + gap),
    }
}

/// A random (logo, occupancy, rules) triple on a square lattice of 4 to 40
/// cells per side, with top-metal rectangles scattered over the placement.
pub fn random_triple(rng: &mut TestRng) -> (InkGrid, OccupancyGrid, ArtRules) {
    let rules = random_rules(rng);
    let cells = rng.random_range(4..=40) as i64;
    let side = cells * rules.pitch();
    let origin = point(rng, 100_000);
    let placement = Rect::new(origin.x, origin.y, origin.x + side, origin.y + side);
    let px = rng.random_range(8..=64);
    let logo = random_logo(rng, px, px);
    let grid = map_logo_to_grid(&logo, placement, &rules).expect("square logo on square placement");
    let metal_count = rng.random_range(0..(cells as usize * 2));
    let metal = random_polygons(rng, LayerKey::new(9, 0), placement, metal_count)
        .into_iter()
        .filter_map(|p| FlatPolygon::rect(p.layer, p.bbox))
        .filter(|p| p.bbox.width() < side / 3 && p.bbox.height() < side / 3)
        .collect::<Vec<_>>();
    let occ = build_occupancy(
        &metal,
        grid.origin(),
        rules.pitch(),
        grid.cols(),
        grid.rows(),
        rules.keepout,
    );
    (grid, occ, rules)
}

/// Exact area of `poly ∩ clip` for a rectilinear polygon: coordinate
/// compression plus a point-in-polygon test per compressed cell.
pub fn clipped_area(poly: &FlatPolygon, clip: &Rect) -> i128 {
    let mut xs: Vec<i64> = poly
        .vertices
        .iter()
        .map(|p| p.x)
        .chain([clip.x0, clip.x1])
        .collect();
    let mut ys: Vec<i64> = poly
        .vertices
        .iter()
        .map(|p| p.y)
        .chain([clip.y0, clip.y1])
        .collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut area = 0i128;
    for wy in ys.windows(2) {
        if wy[0] < clip.y0 || wy[1] > clip.y1 {
            continue;
        }
        for wx in xs.windows(2) {
            if wx[0] < clip.x0 || wx[1] > clip.x1 {
                continue;
            }
            let (cx2, cy2) = ((wx[0] + wx[1]) as i128, (wy[0] + wy[1]) as i128);
            if winding_at(poly, cx2, cy2) != 0 {
                area += (wx[1] - wx[0]) as i128 * (wy[1] - wy[0]) as i128;
            }
        }
    }
    area
}

/// Every sliding density window of `window` cells whose metal fraction
/// exceeds `max_density`, computed shape by shape without shortcuts.
pub fn brute_force_density_violations(
    shapes: &[ArtPolyomino],
    occ: &OccupancyGrid,
    window: usize,
    max_density: f64,
) -> usize {
    let side = window as i64 * occ.pitch;
    let positions = |len: usize| if len >= window { len - window + 1 } else { 1 };
    let mut bad = 0;
    for r in 0..positions(occ.rows()) {
        for c in 0..positions(occ.cols()) {
            let x = occ.origin.x + c as i64 * occ.pitch;
            let y = occ.origin.y + r as i64 * occ.pitch;
            let win = Rect::new(x, y, x + side, y + side);
            let area: i128 = shapes
                .iter()
                .filter(|s| s.bbox().overlaps(&win))
                .map(|s| clipped_area(&s.polygon, &win))
                .sum();
            if area as f64 > max_density * (side as f64 * side as f64) {
                bad += 1;
            }
        }
    }
    bad
}

// ---------------------------------------------------------------- compose

pub fn random_stack(rng: &mut TestRng, layers: usize) -> Vec<LayerStyle> {
    let mut z: Vec<i32> = (0..layers as i32).collect();
    for i in (1..z.len()).rev() {
        z.swap(i, rng.random_range(0..=i));
    }
    (0..layers)
        .map(|l| LayerStyle {
            layer: l as u16 + 1,
            datatype: 0,
            color: Rgb([rng.random(), rng.random(), rng.random()]),
            opacity: rng.random_range(0.05..0.95),
            z_order: z[l],
        })
        .collect()
}

/// Straight-alpha source-over in f64, box-averaged by `factor`, scaled to
/// 0..255 but not rounded. `layers` must be in paint order.
pub fn float_reference(
    layers: &[(&LayerStyle, &CoverageTile)],
    background: Rgb,
    factor: usize,
    width: usize,
    height: usize,
) -> Vec<[f64; 3]> {
    let mut full = vec![[0.0f64; 3]; width * height];
    for (i, px) in full.iter_mut().enumerate() {
        let mut c = background.0.map(|v| v as f64 / 255.0);
        for (style, cov) in layers {
            let a = style.opacity * cov.coverage[i] as f64 / 255.0;
            for (ck, &sk) in c.iter_mut().zip(&style.color.0) {
                *ck = sk as f64 / 255.0 * a + *ck * (1.0 - a);
            }
        }
        *px = c;
    }
    let (ow, oh) = (width / factor, height / factor);
    let mut out = vec![[0.0f64; 3]; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut s = [0.0f64; 3];
            for dy in 0..factor {
                for dx in 0..factor {
                    let p = full[(y * factor + dy) * width + x * factor + dx];
                    for k in 0..3 {
                        s[k] += p[k];
                    }
                }
            }
            out[y * ow + x] = s.map(|v| v / (factor * factor) as f64 * 255.0);
        }
    }
    out
}
