// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::FlatPolygon;
use crate::gdsii::LayerKey;

/// Pixel-to-chip mapping and tile layout used for binning. The raster
/// module derives it from a render frame and tile grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    /// Chip x of the left raster edge, in dbu.
    pub x0: f64,
    /// Chip y of the top raster edge, in dbu.
    pub y1: f64,
    pub dbu_per_px: f64,
    pub width_px: usize,
    pub height_px: usize,
    pub tile_w: usize,
    pub tile_h: usize,
}

impl BinSpec {
    pub fn cols(&self) -> usize {
        self.width_px.div_ceil(self.tile_w)
    }

    pub fn rows(&self) -> usize {
        self.height_px.div_ceil(self.tile_h)
    }

    pub fn tile_count(&self) -> usize {
        self.cols() * self.rows()
    }
}

#[derive(Debug, Default)]
struct LayerBins {
    polys: Vec<FlatPolygon>,
    buckets: Vec<Vec<u32>>,
}

/// Polygons grouped by layer and binned per render tile. Immutable once
/// built; raster workers read it concurrently.
#[derive(Debug)]
pub struct TileIndex {
    spec: BinSpec,
    layers: BTreeMap<LayerKey, LayerBins>,
}

impl TileIndex {
    pub fn new(spec: BinSpec) -> Self {
        Self {
            spec,
            layers: BTreeMap::new(),
        }
    }

    pub fn build(polys: impl IntoIterator<Item = FlatPolygon>, spec: BinSpec) -> Self {
        let mut idx = Self::new(spec);
        for p in polys {
            idx.insert(p);
        }
        idx
    }

    pub fn spec(&self) -> &BinSpec {
        &self.spec
    }

    /// Bins one polygon into every tile its bounding box may reach (with a
    /// one-pixel margin). Polygons entirely outside the raster are dropped.
    pub fn insert(&mut self, poly: FlatPolygon) {
        let s = &self.spec;
        let px0 = ((poly.bbox.x0 as f64 - s.x0) / s.dbu_per_px).floor() - 1.0;
        let px1 = ((poly.bbox.x1 as f64 - s.x0) / s.dbu_per_px).ceil() + 1.0;
        let py0 = ((s.y1 - poly.bbox.y1 as f64) / s.dbu_per_px).floor() - 1.0;
        let py1 = ((s.y1 - poly.bbox.y0 as f64) / s.dbu_per_px).ceil() + 1.0;
        if px1 < 0.0 || py1 < 0.0 || px0 >= s.width_px as f64 || py0 >= s.height_px as f64 {
            return;
        }
        let clamp_x = |v: f64| (v.max(0.0) as usize).min(s.width_px - 1);
        let clamp_y = |v: f64| (v.max(0.0) as usize).min(s.height_px - 1);
        let (c0, c1) = (clamp_x(px0) / s.tile_w, clamp_x(px1) / s.tile_w);
        let (r0, r1) = (clamp_y(py0) / s.tile_h, clamp_y(py1) / s.tile_h);
        let cols = s.cols();
        let n_tiles = s.tile_count();

        let bins = self.layers.entry(poly.layer).or_default();
        if bins.buckets.is_empty() {
            bins.buckets = vec![Vec::new(); n_tiles];
        }
        let id = bins.polys.len() as u32;
        bins.polys.push(poly);
        for r in r0..=r1 {
            for c in c0..=c1 {
                bins.buckets[r * cols + c].push(id);
            }
        }
    }

    pub fn layers(&self) -> impl Iterator<Item = LayerKey> + '_ {
        self.layers.keys().copied()
    }

    pub fn polygon_count(&self, layer: LayerKey) -> usize {
        self.layers.get(&layer).map_or(0, |b| b.polys.len())
    }

    /// Polygons of `layer` that may touch tile `tile` (row-major index).
    pub fn bucket(&self, layer: LayerKey, tile: usize) -> Vec<&FlatPolygon> {
        match self.layers.get(&layer) {
            Some(b) => b.buckets[tile]
                .iter()
                .map(|&i| &b.polys[i as usize])
                .collect(),
            None => Vec::new(),
        }
    }
}
