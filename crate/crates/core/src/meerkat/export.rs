// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::ArtPolyomino;
use crate::coord::Rect;
use crate::gdsii::{Boundary, GdsElement, GdsLibrary, GdsStructure, GdsUnits, LayerKey};

pub const ART_LIBRARY: &str = "MEERKAT";
pub const ART_STRUCTURE: &str = "MEERKAT_ART";

fn um(v: i64, units: &GdsUnits) -> String {
    let s = format!("{:.6}", v as f64 * units.meters_per_dbu * 1e6);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "" | "-0" => "0".to_owned(),
        s => s.to_owned(),
    }
}

/// SVG 1.1 document with one path per shape. Coordinates are µm with y
/// negated, so the view box over `placement` shows the chip upright.
pub fn export_svg(shapes: &[ArtPolyomino], units: &GdsUnits, placement: Rect) -> String {
    let w = um(placement.width(), units);
    let h = um(placement.height(), units);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {w} {h}\">",
        um(placement.x0, units),
        um(-placement.y1, units),
    );
    for shape in shapes {
        s.push_str("<path d=\"");
        for (i, p) in shape.polygon.vertices.iter().enumerate() {
            let _ = write!(
                s,
                "{}{} {} ",
                if i == 0 { "M" } else { "L" },
                um(p.x, units),
                um(-p.y, units)
            );
        }
        s.push_str("Z\"/>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Library holding the art as boundaries on `layer` in a single structure.
pub fn export_art_gds(shapes: &[ArtPolyomino], layer: LayerKey, units: GdsUnits) -> GdsLibrary {
    let mut lib = GdsLibrary::new(ART_LIBRARY, units);
    let mut top = GdsStructure::new(ART_STRUCTURE);
    top.elements = shapes
        .iter()
        .map(|s| {
            GdsElement::Boundary(Boundary {
                key: layer,
                points: s.polygon.vertices.clone(),
            })
        })
        .collect();
    lib.structures.push(top);
    lib
}
