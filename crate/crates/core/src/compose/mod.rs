// SPDX-License-Identifier: Apache-2.0

//! Layer coloring, compositing, downscaling, stitching and PDF output.

mod color;
mod pdf;
mod stitch;

use std::path::Path;

pub use color::{
    colorize, composite_over, downscale, sort_stack, FloatTile, LayerStyle, Rgb, RgbaTile,
};
pub use pdf::{emit_pdf, page_size_pt, PdfPage, MAX_PAGE_PT};
pub use stitch::{
    decode_png_rgba, read_png_rgba, stitch, write_png_rgba, Manifest, PartEntry, PngColor,
    StitchTarget, Stitcher, DEFAULT_PART_MAX_PX,
};

use crate::exec::Exec;
use crate::geom::TileIndex;
use crate::raster::{rasterize_tile, CoverageTile, RenderFrame, TileGrid};

#[derive(Debug, thiserror::Error)]
pub enum ComposeError {
    #[error("bad color {0:?}, expected #rrggbb")]
    BadColor(String),
    #[error("tile dimensions differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{width}x{height} tile is not divisible by downscale factor {factor}")]
    Indivisible {
        width: usize,
        height: usize,
        factor: usize,
    },
    #[error("z_order {0} used by more than one layer")]
    DuplicateZOrder(i32),
    #[error("tile {0} was never delivered")]
    MissingTile(usize),
    #[error("tile {0} delivered twice or out of range")]
    DuplicateTile(usize),
    #[error("manifest lists no image parts")]
    EmptyManifest,
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("page of {width_pt:.1}x{height_pt:.1} pt exceeds the {max} pt PDF limit; raise dpi to at least {min_dpi:.1}")]
    PageTooLarge {
        width_pt: f64,
        height_pt: f64,
        max: f64,
        min_dpi: f64,
    },
    #[error("dpi must be positive, got {0}")]
    BadDpi(f64),
    #[error("{0}: unsupported PNG for PDF embedding ({1})")]
    UnsupportedPng(String, String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}: {1}")]
    Png(String, String),
}

impl ComposeError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ComposeError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Paints a stack of coverage tiles (already in paint order) over an opaque
/// background, box-downscales by `factor` and quantizes once.
///
/// Works in bands of `factor` rows, so the float working set stays a few
/// rows regardless of tile size. Results equal the whole-tile
/// [`FloatTile`] path exactly.
pub fn compose_tile(
    index: usize,
    layers: &[(&LayerStyle, &CoverageTile)],
    background: Rgb,
    factor: usize,
    width: usize,
    height: usize,
) -> Result<RgbaTile, ComposeError> {
    if factor == 0 || !width.is_multiple_of(factor) || !height.is_multiple_of(factor) {
        return Err(ComposeError::Indivisible {
            width,
            height,
            factor,
        });
    }
    for (_, cov) in layers {
        if (cov.width, cov.height) != (width, height) {
            return Err(ComposeError::DimensionMismatch {
                left: (width, height),
                right: (cov.width, cov.height),
            });
        }
    }
    let (ow, oh) = (width / factor, height / factor);
    let mut pixels = Vec::with_capacity(ow * oh * 4);
    for band in 0..oh {
        let mut acc = FloatTile::background(index, width, factor, background);
        for (style, cov) in layers {
            acc.paint_rows(cov, band * factor, style);
        }
        pixels.extend_from_slice(&acc.downscale(factor)?.quantize().pixels);
    }
    Ok(RgbaTile {
        index,
        width: ow,
        height: oh,
        pixels,
    })
}

/// Renders, composes and stitches a whole frame, one tile row at a time.
///
/// Tiles within a row run on `exec`; rows reach the stitcher in order, so at
/// most one row of finished tiles is held. `stack` must already be in paint
/// order (see [`sort_stack`]).
#[allow(clippy::too_many_arguments)]
pub fn compose_frame(
    index: &TileIndex,
    frame: &RenderFrame,
    grid: &TileGrid,
    stack: &[LayerStyle],
    background: Rgb,
    factor: usize,
    exec: Exec,
    stitcher: &mut Stitcher,
) -> Result<(), ComposeError> {
    for row in 0..grid.rows {
        let tiles = exec.map_range(grid.cols, |col| {
            let tile = grid.tile(row * grid.cols + col);
            let covs: Vec<CoverageTile> = stack
                .iter()
                .map(|s| rasterize_tile(&index.bucket(s.key(), tile.index), frame, &tile))
                .collect();
            let layers: Vec<(&LayerStyle, &CoverageTile)> = stack.iter().zip(&covs).collect();
            compose_tile(tile.index, &layers, background, factor, tile.w, tile.h)
        });
        for t in tiles {
            stitcher.push(t?)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_equals_whole_tile() {
        let (w, h) = (16, 8);
        let covs: Vec<CoverageTile> = (0..3u32)
            .map(|l| CoverageTile {
                index: 0,
                width: w,
                height: h,
                coverage: (0..(w * h) as u32)
                    .map(|i| ((i * 37 + l * 91) % 256) as u8)
                    .collect(),
            })
            .collect();
        let styles: Vec<LayerStyle> = (0..3)
            .map(|l| LayerStyle {
                layer: l as u16,
                datatype: 0,
                color: Rgb([40 * l as u8, 200, 255 - 60 * l as u8]),
                opacity: 0.3 + 0.2 * l as f64,
                z_order: l,
            })
            .collect();
        let layers: Vec<(&LayerStyle, &CoverageTile)> = styles.iter().zip(&covs).collect();
        for factor in [1, 2, 4] {
            let mut whole = FloatTile::background(0, w, h, Rgb([10, 20, 30]));
            for (s, c) in &layers {
                whole.paint(c, s);
            }
            let expect = whole.downscale(factor).unwrap().quantize();
            let got = compose_tile(0, &layers, Rgb([10, 20, 30]), factor, w, h).unwrap();
            assert_eq!(got, expect);
        }
        assert!(compose_tile(0, &layers, Rgb([0, 0, 0]), 3, w, h).is_err());
    }
}
