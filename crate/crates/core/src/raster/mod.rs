// SPDX-License-Identifier: Apache-2.0

//! Tile planning and per-layer coverage rasterization.

mod frame;
mod scanline;

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use frame::{plan_tiles, RenderFrame, TileGrid, TileRect, DEFAULT_MAX_TILE_PX};
pub use scanline::rasterize_tile;

use crate::exec::Exec;
use crate::gdsii::LayerKey;
use crate::geom::TileIndex;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("max_tile_px {0} is below the 64-pixel minimum")]
    TileCapTooSmall(u64),
    #[error("render window is empty")]
    EmptyFrame,
    #[error("supersample {0} is not one of 1, 2, 4, 8")]
    BadSupersample(u32),
    #[error("resolution {0} nm/px must be positive")]
    BadResolution(f64),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("encoding {path}: {source}")]
    Png {
        path: PathBuf,
        source: png::EncodingError,
    },
}

/// 8-bit coverage of one layer over one tile (255 = fully covered).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageTile {
    pub index: usize,
    pub width: usize,
    pub height: usize,
    pub coverage: Vec<u8>,
}

impl CoverageTile {
    pub fn blank(tile: &TileRect, _frame: &RenderFrame) -> Self {
        Self {
            index: tile.index,
            width: tile.w,
            height: tile.h,
            coverage: vec![0; tile.w * tile.h],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.coverage[y * self.width + x]
    }
}

/// Rasterizes one layer over every tile of `grid`, handing each finished
/// tile to `sink` from whichever worker produced it.
pub fn render_layer<E, F>(
    index: &TileIndex,
    layer: LayerKey,
    frame: &RenderFrame,
    grid: &TileGrid,
    exec: Exec,
    sink: F,
) -> Result<(), E>
where
    E: Send,
    F: Fn(CoverageTile) -> Result<(), E> + Sync + Send,
{
    exec.try_for_each_range(grid.len(), |t| {
        let tile = grid.tile(t);
        let bucket = index.bucket(layer, t);
        sink(rasterize_tile(&bucket, frame, &tile))
    })
}

/// Collecting form of [`render_layer`], tiles in row-major order.
pub fn render_layer_tiles(
    index: &TileIndex,
    layer: LayerKey,
    frame: &RenderFrame,
    grid: &TileGrid,
    exec: Exec,
) -> Vec<CoverageTile> {
    exec.map_range(grid.len(), |t| {
        let tile = grid.tile(t);
        rasterize_tile(&index.bucket(layer, t), frame, &tile)
    })
}

/// Debug/interchange file name for a layer tile.
pub fn tile_file_name(layer: LayerKey, col: usize, row: usize) -> String {
    format!(
        "L{}_D{}_tx{}_ty{}.png",
        layer.layer, layer.datatype, col, row
    )
}

/// Writes a coverage tile as an 8-bit grayscale PNG.
pub fn write_coverage_png(tile: &CoverageTile, path: &Path) -> Result<(), RasterError> {
    let io = |source| RasterError::Io {
        path: path.to_owned(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    {
        let mut enc = png::Encoder::new(&mut w, tile.width as u32, tile.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Fast);
        let png_err = |source| RasterError::Png {
            path: path.to_owned(),
            source,
        };
        let mut writer = enc.write_header().map_err(png_err)?;
        writer.write_image_data(&tile.coverage).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
    }
    w.flush().map_err(io)
}
