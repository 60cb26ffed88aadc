// SPDX-License-Identifier: Apache-2.0

//! Hierarchy flattening, path expansion, occupancy grids and the per-tile
//! polygon buckets consumed by the rasterizer.

mod bucket;
mod flatten;
mod occupancy;
mod path;
mod transform;

pub use bucket::{BinSpec, TileIndex};
pub use flatten::{flatten, flatten_each, FlattenError};
pub use occupancy::{build_occupancy, BitGrid, OccupancyGrid};
pub use path::{path_outlines, path_to_polygon};
pub use transform::{apply_transform, Affine};

use crate::coord::{Point, Rect};
use crate::gdsii::LayerKey;

/// A layer-tagged polygon in dbu, implicitly closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatPolygon {
    pub layer: LayerKey,
    pub vertices: Vec<Point>,
    pub bbox: Rect,
}

impl FlatPolygon {
    /// `None` for fewer than three vertices or zero signed area.
    pub fn new(layer: LayerKey, vertices: Vec<Point>) -> Option<Self> {
        if vertices.len() < 3 {
            return None;
        }
        let poly = FlatPolygon {
            layer,
            bbox: Rect::bounding(&vertices)?,
            vertices,
        };
        (poly.signed_area2() != 0).then_some(poly)
    }

    pub fn rect(layer: LayerKey, r: Rect) -> Option<Self> {
        Self::new(layer, r.corners().to_vec())
    }

    /// Twice the signed (shoelace) area; positive when counter-clockwise.
    pub fn signed_area2(&self) -> i128 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                p.x as i128 * q.y as i128 - q.x as i128 * p.y as i128
            })
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.signed_area2().unsigned_abs() as f64 / 2.0
    }

    /// Directed edges `(from, to)` including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}
