// SPDX-License-Identifier: Apache-2.0

//! Deterministic synthetic layouts and logos for demos, tests and benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coord::Point;
use crate::gdsii::{
    ARef, Boundary, GdsElement, GdsLibrary, GdsStructure, GdsTransform, GdsUnits, LayerKey,
    PathElement, SRef,
};
use crate::meerkat::RgbaImage;

pub const TOP_CELL: &str = "CHIP";

#[derive(Debug, Clone)]
pub struct ChipSpec {
    /// Die edge in dbu (1 dbu = 1 nm).
    pub die: i64,
    /// Leaf cell pitch in dbu; must divide `die / 2`.
    pub leaf: i64,
    /// Layers in stack order; the last one is the top metal.
    pub layers: Vec<LayerKey>,
    pub rects_per_leaf: usize,
    /// Distinct leaf cells, each filling a stripe of every quadrant.
    pub variants: usize,
    /// Vertical top-metal power straps across the die.
    pub straps: usize,
    pub seed: u64,
}

impl ChipSpec {
    /// 1 mm square, six layers, 10^5 rectangles.
    pub fn millimetre() -> Self {
        Self {
            die: 1_000_000,
            leaf: 10_000,
            layers: (1..=6).map(|l| LayerKey::new(l, 0)).collect(),
            rects_per_leaf: 10,
            variants: 5,
            straps: 8,
            seed: 1,
        }
    }

    /// 100 µm square with four layers, small enough to render in a moment.
    pub fn demo() -> Self {
        Self {
            die: 100_000,
            leaf: 5_000,
            layers: (1..=4).map(|l| LayerKey::new(l, 0)).collect(),
            rects_per_leaf: 8,
            variants: 2,
            straps: 3,
            seed: 7,
        }
    }

    pub fn top_metal(&self) -> LayerKey {
        *self.layers.last().expect("at least one layer")
    }

    pub fn leaf_instances(&self) -> usize {
        let n = (self.die / self.leaf) as usize;
        n * n
    }

    /// Rectangles after flattening, straps excluded.
    pub fn rect_count(&self) -> usize {
        self.leaf_instances() * self.rects_per_leaf
    }
}

/// Four rotated copies of one quadrant block, each block an array of leaf
/// cells, each leaf a set of random rectangles.
pub fn synth_chip(spec: &ChipSpec) -> GdsLibrary {
    let half = spec.die / 2;
    assert!(
        spec.leaf > 0 && half % spec.leaf == 0,
        "leaf must divide half the die"
    );
    let per_side = (half / spec.leaf) as usize;
    assert!(
        spec.variants >= 1 && per_side.is_multiple_of(spec.variants),
        "variants must divide the leaf rows"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut lib = GdsLibrary::new("SYNTH", GdsUnits::default());

    for v in 0..spec.variants {
        let mut leaf = GdsStructure::new(format!("LEAF{v}"));
        for _ in 0..spec.rects_per_leaf {
            let key = spec.layers[rng.random_range(0..spec.layers.len())];
            let long = rng.random_range(spec.leaf / 20..=spec.leaf / 2);
            let short = rng.random_range(spec.leaf / 200..=spec.leaf / 20).max(1);
            let (w, h) = if rng.random_bool(0.5) {
                (long, short)
            } else {
                (short, long)
            };
            let x = rng.random_range(0..=spec.leaf - w);
            let y = rng.random_range(0..=spec.leaf - h);
            leaf.elements.push(GdsElement::Boundary(Boundary {
                key,
                points: vec![
                    Point::new(x, y),
                    Point::new(x + w, y),
                    Point::new(x + w, y + h),
                    Point::new(x, y + h),
                ],
            }));
        }
        lib.structures.push(leaf);
    }

    let mut block = GdsStructure::new("BLOCK");
    let stripe = per_side / spec.variants;
    for v in 0..spec.variants {
        block.elements.push(GdsElement::ARef(ARef {
            target: format!("LEAF{v}"),
            transform: GdsTransform::translate(0, (v * stripe) as i64 * spec.leaf),
            cols: per_side as u16,
            rows: stripe as u16,
            col_step: Point::new(spec.leaf, 0),
            row_step: Point::new(0, spec.leaf),
        }));
    }
    lib.structures.push(block);

    let mut top = GdsStructure::new(TOP_CELL);
    for (angle, tx, ty) in [
        (0.0, 0, 0),
        (90.0, 2 * half, 0),
        (180.0, 2 * half, 2 * half),
        (270.0, 0, 2 * half),
    ] {
        top.elements.push(GdsElement::SRef(SRef {
            target: "BLOCK".into(),
            transform: GdsTransform {
                angle_deg: angle,
                ..GdsTransform::translate(tx, ty)
            },
        }));
    }
    let strap_w = (spec.leaf / 4).max(2) & !1;
    for s in 0..spec.straps {
        let x = spec.die * (2 * s as i64 + 1) / (2 * spec.straps as i64);
        top.elements.push(GdsElement::Path(PathElement {
            key: spec.top_metal(),
            width: strap_w,
            pathtype: 0,
            points: vec![Point::new(x, 0), Point::new(x, spec.die)],
        }));
    }
    lib.structures.push(top);
    lib
}

/// A ring around a solid disc quarter and a diagonal bar, drawn in black,
/// red and half-transparent black on white.
pub fn synth_logo(width: usize, height: usize) -> RgbaImage {
    let mut pixels = Vec::with_capacity(width * height * 4);
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let r = cx.min(cy);
    for y in 0..height {
        for x in 0..width {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            let d = dx.hypot(dy) / r;
            let bar = (dx - dy).abs() < 0.12 * r;
            let px = if (0.75..0.95).contains(&d) {
                [0, 0, 0, 255]
            } else if d < 0.5 && dx < 0.0 && dy > 0.0 {
                [200, 20, 20, 255]
            } else if bar && d < 0.75 {
                [0, 0, 0, 160]
            } else {
                [255, 255, 255, 255]
            };
            pixels.extend_from_slice(&px);
        }
    }
    RgbaImage {
        width,
        height,
        pixels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::Rect;
    use crate::geom::flatten;

    #[test]
    fn demo_chip_flattens_to_expected_counts() {
        let spec = ChipSpec::demo();
        let lib = synth_chip(&spec);
        let polys = flatten(&lib, TOP_CELL, None).unwrap();
        let straps = spec.straps;
        assert_eq!(polys.len(), spec.rect_count() + straps);
        let bbox = polys.iter().fold(polys[0].bbox, |a, p| a.union(&p.bbox));
        assert!(Rect::new(0, 0, spec.die, spec.die).contains_rect(&bbox));
    }

    #[test]
    fn deterministic() {
        let spec = ChipSpec::demo();
        assert_eq!(synth_chip(&spec), synth_chip(&spec));
        assert_eq!(synth_logo(16, 16), synth_logo(16, 16));
    }

    #[test]
    fn millimetre_scale() {
        let spec = ChipSpec::millimetre();
        assert_eq!(spec.rect_count(), 100_000);
        let polys = flatten(&synth_chip(&spec), TOP_CELL, None).unwrap();
        assert_eq!(polys.len(), spec.rect_count() + spec.straps);
    }
}
