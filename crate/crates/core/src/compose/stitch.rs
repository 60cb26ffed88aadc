// SPDX-License-Identifier: Apache-2.0

//! Streaming assembly of tiles into PNG output.
//!
//! Tiles may arrive in any order. A tile row is written out as soon as all
//! of its tiles are present, one image row at a time, so the stitcher holds
//! at most the tiles that have arrived ahead of the row being written.
//! Images above the part budget are split into full-width bands (or, for
//! very wide images, a grid) of separate PNG files described by a manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ComposeError, RgbaTile};
use crate::raster::TileGrid;

pub const DEFAULT_PART_MAX_PX: u64 = 250_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartEntry {
    pub file: String,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Description of a (possibly multi-part) stitched image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub width_px: usize,
    pub height_px: usize,
    pub dpi: Option<f64>,
    pub parts: Vec<PartEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, ComposeError> {
        let text = std::fs::read_to_string(path).map_err(|e| ComposeError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| ComposeError::Manifest(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PngColor {
    /// Alpha dropped; only meaningful for opaque tiles.
    Rgb,
    /// Straight (un-premultiplied) alpha.
    Rgba,
}

impl PngColor {
    fn channels(self) -> usize {
        match self {
            PngColor::Rgb => 3,
            PngColor::Rgba => 4,
        }
    }
}

/// Where and how the stitched image is written.
#[derive(Debug, Clone)]
pub struct StitchTarget {
    /// The single-PNG path; multi-part output derives names from its stem.
    pub png_path: PathBuf,
    pub color: PngColor,
    pub part_max_px: u64,
    pub dpi: Option<f64>,
}

impl StitchTarget {
    pub fn manifest_path(&self) -> PathBuf {
        sibling(&self.png_path, "manifest.json")
    }
}

fn sibling(png: &Path, suffix: &str) -> PathBuf {
    let stem = png.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
    png.with_file_name(format!("{stem}.{suffix}"))
}

fn partial(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Part layout for an image under a pixel budget.
fn plan_parts(width: usize, height: usize, budget: u64) -> (usize, usize) {
    let budget = budget.max(1);
    if (width as u64) * (height as u64) <= budget {
        return (width, height);
    }
    let part_w = (width as u64).min(budget) as usize;
    let part_h = ((budget / part_w as u64) as usize).clamp(1, height);
    (part_w, part_h)
}

struct OpenPart {
    entry: PartEntry,
    path: PathBuf,
    writer: png::StreamWriter<'static, File>,
}

pub struct Stitcher {
    grid: TileGrid,
    target: StitchTarget,
    part_w: usize,
    part_h: usize,
    multi: bool,
    pending: BTreeMap<usize, RgbaTile>,
    seen: Vec<bool>,
    next_row: usize,
    band: Vec<OpenPart>,
    written: Vec<(PathBuf, PathBuf)>,
    entries: Vec<PartEntry>,
    row_buf: Vec<u8>,
    finished: bool,
}

impl Stitcher {
    pub fn new(grid: TileGrid, target: StitchTarget) -> Self {
        let (part_w, part_h) = plan_parts(grid.width, grid.height, target.part_max_px);
        let multi = part_w < grid.width || part_h < grid.height;
        Self {
            row_buf: vec![0; grid.width * target.color.channels()],
            grid,
            target,
            part_w,
            part_h,
            multi,
            pending: BTreeMap::new(),
            seen: vec![false; grid.len()],
            next_row: 0,
            band: Vec::new(),
            written: Vec::new(),
            entries: Vec::new(),
            finished: false,
        }
    }

    pub fn is_multi_part(&self) -> bool {
        self.multi
    }

    /// Accepts one tile; writes any tile rows that became complete.
    pub fn push(&mut self, tile: RgbaTile) -> Result<(), ComposeError> {
        let idx = tile.index;
        if idx >= self.grid.len() || self.seen[idx] {
            return Err(ComposeError::DuplicateTile(idx));
        }
        let r = self.grid.tile(idx);
        if (tile.width, tile.height) != (r.w, r.h) {
            return Err(ComposeError::DimensionMismatch {
                left: (r.w, r.h),
                right: (tile.width, tile.height),
            });
        }
        self.seen[idx] = true;
        self.pending.insert(idx, tile);
        while self.next_row < self.grid.rows && self.row_complete(self.next_row) {
            self.flush_row(self.next_row)?;
            self.next_row += 1;
        }
        Ok(())
    }

    fn row_complete(&self, row: usize) -> bool {
        let base = row * self.grid.cols;
        (base..base + self.grid.cols).all(|i| self.pending.contains_key(&i))
    }

    fn flush_row(&mut self, row: usize) -> Result<(), ComposeError> {
        let base = row * self.grid.cols;
        let tiles: Vec<RgbaTile> = (base..base + self.grid.cols)
            .map(|i| self.pending.remove(&i).expect("row complete"))
            .collect();
        let ch = self.target.color.channels();
        let y0 = row * self.grid.tile_h;
        for ty in 0..tiles[0].height {
            let mut x = 0;
            for t in &tiles {
                let src = &t.pixels[ty * t.width * 4..(ty + 1) * t.width * 4];
                let dst = &mut self.row_buf[x * ch..(x + t.width) * ch];
                convert_row(src, dst, self.target.color);
                x += t.width;
            }
            self.write_image_row(y0 + ty)?;
        }
        Ok(())
    }

    fn write_image_row(&mut self, y: usize) -> Result<(), ComposeError> {
        if y.is_multiple_of(self.part_h) {
            self.close_band()?;
            self.open_band(y)?;
        }
        let ch = self.target.color.channels();
        for part in &mut self.band {
            let seg = &self.row_buf[part.entry.x * ch..(part.entry.x + part.entry.w) * ch];
            part.writer
                .write_all(seg)
                .map_err(|e| ComposeError::io(&part.path, e))?;
        }
        Ok(())
    }

    fn open_band(&mut self, y: usize) -> Result<(), ComposeError> {
        let h = self.part_h.min(self.grid.height - y);
        let mut x = 0;
        while x < self.grid.width {
            let w = self.part_w.min(self.grid.width - x);
            let path = if self.multi {
                sibling(
                    &self.target.png_path,
                    &format!("part-r{}-c{}.png", y / self.part_h, x / self.part_w),
                )
            } else {
                self.target.png_path.clone()
            };
            let tmp = partial(&path);
            let file = File::create(&tmp).map_err(|e| ComposeError::io(&tmp, e))?;
            let mut enc = png::Encoder::new(file, w as u32, h as u32);
            enc.set_color(match self.target.color {
                PngColor::Rgb => png::ColorType::Rgb,
                PngColor::Rgba => png::ColorType::Rgba,
            });
            enc.set_depth(png::BitDepth::Eight);
            enc.set_compression(png::Compression::Fast);
            let png_err =
                |e: png::EncodingError| ComposeError::Png(tmp.display().to_string(), e.to_string());
            let writer = enc
                .write_header()
                .map_err(png_err)?
                .into_stream_writer_with_size(1 << 20)
                .map_err(png_err)?;
            let file_name = path.file_name().unwrap().to_string_lossy().into_owned();
            self.band.push(OpenPart {
                entry: PartEntry {
                    file: file_name,
                    x,
                    y,
                    w,
                    h,
                },
                path,
                writer,
            });
            x += w;
        }
        Ok(())
    }

    fn close_band(&mut self) -> Result<(), ComposeError> {
        for part in self.band.drain(..) {
            let tmp = partial(&part.path);
            let png_err =
                |e: png::EncodingError| ComposeError::Png(tmp.display().to_string(), e.to_string());
            part.writer.finish().map_err(png_err)?;
            self.written.push((tmp, part.path));
            self.entries.push(part.entry);
        }
        Ok(())
    }

    /// Completes all files and returns the manifest. In multi-part mode the
    /// manifest is also written next to the parts.
    pub fn finish(mut self) -> Result<Manifest, ComposeError> {
        if let Some(missing) = self.seen.iter().position(|s| !s) {
            return Err(ComposeError::MissingTile(missing));
        }
        self.close_band()?;
        let manifest = Manifest {
            width_px: self.grid.width,
            height_px: self.grid.height,
            dpi: self.target.dpi,
            parts: self.entries.clone(),
        };
        if self.multi {
            let path = self.target.manifest_path();
            let tmp = partial(&path);
            let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            std::fs::write(&tmp, json).map_err(|e| ComposeError::io(&tmp, e))?;
            self.written.push((tmp, path));
        }
        for (tmp, path) in &self.written {
            std::fs::rename(tmp, path).map_err(|e| ComposeError::io(path, e))?;
        }
        self.finished = true;
        Ok(manifest)
    }
}

impl Drop for Stitcher {
    fn drop(&mut self) {
        if self.finished {
            return;
        }
        // abandon: never leave half-written images under their final names
        let open: Vec<PathBuf> = self.band.drain(..).map(|p| partial(&p.path)).collect();
        for p in open.iter().chain(self.written.iter().map(|(tmp, _)| tmp)) {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn convert_row(src: &[u8], dst: &mut [u8], color: PngColor) {
    match color {
        PngColor::Rgb => {
            for (s, d) in src.chunks_exact(4).zip(dst.chunks_exact_mut(3)) {
                let straight = unpremultiply(s);
                d.copy_from_slice(&straight[..3]);
            }
        }
        PngColor::Rgba => {
            for (s, d) in src.chunks_exact(4).zip(dst.chunks_exact_mut(4)) {
                d.copy_from_slice(&unpremultiply(s));
            }
        }
    }
}

#[inline]
fn unpremultiply(p: &[u8]) -> [u8; 4] {
    let a = p[3] as u32;
    match a {
        255 => [p[0], p[1], p[2], 255],
        0 => [0, 0, 0, 0],
        _ => {
            let f = |c: u8| ((c as u32 * 255 * 2 + a) / (2 * a)).min(255) as u8;
            [f(p[0]), f(p[1]), f(p[2]), p[3]]
        }
    }
}

/// Stitches a full set of tiles in one call.
pub fn stitch(
    tiles: impl IntoIterator<Item = RgbaTile>,
    grid: TileGrid,
    target: StitchTarget,
) -> Result<Manifest, ComposeError> {
    let mut s = Stitcher::new(grid, target);
    for t in tiles {
        s.push(t)?;
    }
    s.finish()
}

/// Decodes a PNG into 8-bit RGBA, returning `(width, height, pixels)`.
pub fn read_png_rgba(path: &Path) -> Result<(usize, usize, Vec<u8>), ComposeError> {
    let file = File::open(path).map_err(|e| ComposeError::io(path, e))?;
    decode_png_rgba(std::io::BufReader::new(file))
        .map_err(|e| ComposeError::Png(path.display().to_string(), e))
}

pub fn decode_png_rgba<R: std::io::BufRead + std::io::Seek>(
    r: R,
) -> Result<(usize, usize, Vec<u8>), String> {
    let mut dec = png::Decoder::new(r);
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = dec.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or("image too large")?];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    let (w, h) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let rgba = match info.color_type {
        png::ColorType::Rgba => data.to_vec(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .flat_map(|p| [p[0], p[1], p[2], 255])
            .collect(),
        png::ColorType::Grayscale => data.iter().flat_map(|&g| [g, g, g, 255]).collect(),
        png::ColorType::GrayscaleAlpha => data
            .chunks_exact(2)
            .flat_map(|p| [p[0], p[0], p[0], p[1]])
            .collect(),
        png::ColorType::Indexed => return Err("palette not expanded".into()),
    };
    Ok((w, h, rgba))
}

/// Writes straight-alpha 8-bit RGBA pixels as a PNG.
pub fn write_png_rgba(
    path: &Path,
    width: usize,
    height: usize,
    pixels: &[u8],
) -> Result<(), ComposeError> {
    let file = File::create(path).map_err(|e| ComposeError::io(path, e))?;
    let mut enc = png::Encoder::new(std::io::BufWriter::new(file), width as u32, height as u32);
    enc.set_color(png::ColorType::Rgba);
    enc.set_depth(png::BitDepth::Eight);
    let png_err =
        |e: png::EncodingError| ComposeError::Png(path.display().to_string(), e.to_string());
    let mut w = enc.write_header().map_err(png_err)?;
    w.write_image_data(pixels).map_err(png_err)?;
    w.finish().map_err(png_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn part_planning() {
        assert_eq!(plan_parts(100, 100, 10_000), (100, 100));
        assert_eq!(plan_parts(100, 100, 2_500), (100, 25));
        assert_eq!(plan_parts(40_000, 40_000, 250_000_000), (40_000, 6_250));
        assert_eq!(plan_parts(1000, 10, 500), (500, 1));
    }

    #[test]
    fn unpremultiply_values() {
        assert_eq!(unpremultiply(&[128, 0, 0, 128]), [255, 0, 0, 128]);
        assert_eq!(unpremultiply(&[0, 0, 0, 0]), [0, 0, 0, 0]);
        assert_eq!(unpremultiply(&[10, 20, 30, 255]), [10, 20, 30, 255]);
    }
}
