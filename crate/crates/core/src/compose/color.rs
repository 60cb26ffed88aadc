// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ComposeError;
use crate::gdsii::LayerKey;
use crate::raster::CoverageTile;

/// sRGB color, written as `#rrggbb` in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0, 0, 0]);

    pub fn parse(s: &str) -> Result<Rgb, ComposeError> {
        let bad = || ComposeError::BadColor(s.to_owned());
        let hex = s.strip_prefix('#').ok_or_else(bad)?;
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| bad());
        Ok(Rgb([byte(0)?, byte(2)?, byte(4)?]))
    }
}

impl std::fmt::Display for Rgb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0[0], self.0[1], self.0[2])
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rgb::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// How one layer is painted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerStyle {
    pub layer: u16,
    pub datatype: u16,
    pub color: Rgb,
    pub opacity: f64,
    /// Paint order, lowest first (bottom of the stack).
    pub z_order: i32,
}

impl LayerStyle {
    pub fn key(&self) -> LayerKey {
        LayerKey::new(self.layer, self.datatype)
    }
}

/// Premultiplied 8-bit RGBA tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbaTile {
    pub index: usize,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RgbaTile {
    pub fn filled(index: usize, width: usize, height: usize, px: [u8; 4]) -> Self {
        Self {
            index,
            width,
            height,
            pixels: px
                .iter()
                .copied()
                .cycle()
                .take(width * height * 4)
                .collect(),
        }
    }

    pub fn opaque(index: usize, width: usize, height: usize, bg: Rgb) -> Self {
        let [r, g, b] = bg.0;
        Self::filled(index, width, height, [r, g, b, 255])
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 4] {
        let i = (y * self.width + x) * 4;
        self.pixels[i..i + 4].try_into().unwrap()
    }
}

#[inline]
fn round_u8(v: f64) -> u8 {
    // values are non-negative, so round() is ties-away-from-zero here
    v.round().clamp(0.0, 255.0) as u8
}

/// Tints a coverage tile: alpha `a = opacity * coverage / 255`, channels
/// `round(a * color)`, alpha channel `round(255 a)`.
pub fn colorize(cov: &CoverageTile, style: &LayerStyle) -> RgbaTile {
    let mut lut = [[0u8; 4]; 256];
    for (c, px) in lut.iter_mut().enumerate() {
        let a = style.opacity * c as f64 / 255.0;
        *px = [
            round_u8(a * style.color.0[0] as f64),
            round_u8(a * style.color.0[1] as f64),
            round_u8(a * style.color.0[2] as f64),
            round_u8(255.0 * a),
        ];
    }
    RgbaTile {
        index: cov.index,
        width: cov.width,
        height: cov.height,
        pixels: cov.coverage.iter().flat_map(|&c| lut[c as usize]).collect(),
    }
}

/// Premultiplied source-over: `above + (1 - above_alpha) * acc`.
pub fn composite_over(acc: &RgbaTile, above: &RgbaTile) -> Result<RgbaTile, ComposeError> {
    if (acc.width, acc.height) != (above.width, above.height) {
        return Err(ComposeError::DimensionMismatch {
            left: (acc.width, acc.height),
            right: (above.width, above.height),
        });
    }
    let pixels = acc
        .pixels
        .chunks_exact(4)
        .zip(above.pixels.chunks_exact(4))
        .flat_map(|(d, s)| {
            let keep = 1.0 - s[3] as f64 / 255.0;
            [0, 1, 2, 3].map(|c| round_u8(s[c] as f64 + keep * d[c] as f64))
        })
        .collect();
    Ok(RgbaTile {
        index: acc.index,
        width: acc.width,
        height: acc.height,
        pixels,
    })
}

/// Box filter: each output pixel is the rounded mean of `factor²` inputs.
pub fn downscale(tile: &RgbaTile, factor: usize) -> Result<RgbaTile, ComposeError> {
    if factor == 0 || !tile.width.is_multiple_of(factor) || !tile.height.is_multiple_of(factor) {
        return Err(ComposeError::Indivisible {
            width: tile.width,
            height: tile.height,
            factor,
        });
    }
    if factor == 1 {
        return Ok(tile.clone());
    }
    let (ow, oh) = (tile.width / factor, tile.height / factor);
    let n = (factor * factor) as u32;
    let mut pixels = Vec::with_capacity(ow * oh * 4);
    for oy in 0..oh {
        for ox in 0..ow {
            let mut sum = [0u32; 4];
            for y in oy * factor..(oy + 1) * factor {
                for x in ox * factor..(ox + 1) * factor {
                    let i = (y * tile.width + x) * 4;
                    for (s, &p) in sum.iter_mut().zip(&tile.pixels[i..i + 4]) {
                        *s += p as u32;
                    }
                }
            }
            pixels.extend(sum.map(|s| ((2 * s + n) / (2 * n)) as u8));
        }
    }
    Ok(RgbaTile {
        index: tile.index,
        width: ow,
        height: oh,
        pixels,
    })
}

/// Opaque floating-point accumulator for a layer stack.
///
/// The pipeline paints every layer into this and quantizes once at the
/// end. Chaining 8-bit [`composite_over`] calls rounds at every layer, and
/// over deep stacks those errors add up past one code value.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatTile {
    pub index: usize,
    pub width: usize,
    pub height: usize,
    /// Premultiplied RGB in 0..=255; alpha is implicitly 1.
    pub rgb: Vec<f32>,
}

impl FloatTile {
    pub fn background(index: usize, width: usize, height: usize, bg: Rgb) -> Self {
        let px = bg.0.map(|c| c as f32);
        Self {
            index,
            width,
            height,
            rgb: px
                .iter()
                .copied()
                .cycle()
                .take(width * height * 3)
                .collect(),
        }
    }

    /// Paints one layer's coverage on top.
    pub fn paint(&mut self, cov: &CoverageTile, style: &LayerStyle) {
        debug_assert_eq!((cov.width, cov.height), (self.width, self.height));
        self.paint_rows(cov, 0, style);
    }

    /// Paints coverage rows `row0..row0 + self.height` onto this tile.
    pub fn paint_rows(&mut self, cov: &CoverageTile, row0: usize, style: &LayerStyle) {
        debug_assert_eq!(cov.width, self.width);
        if style.opacity <= 0.0 {
            return;
        }
        let color = style.color.0.map(|c| c as f32);
        let mut alpha = [0f32; 256];
        for (c, a) in alpha.iter_mut().enumerate() {
            *a = (style.opacity * c as f64 / 255.0) as f32;
        }
        let rows = &cov.coverage[row0 * cov.width..(row0 + self.height) * cov.width];
        for (px, &c) in self.rgb.chunks_exact_mut(3).zip(rows) {
            if c == 0 {
                continue;
            }
            let a = alpha[c as usize];
            let keep = 1.0 - a;
            px[0] = a * color[0] + keep * px[0];
            px[1] = a * color[1] + keep * px[1];
            px[2] = a * color[2] + keep * px[2];
        }
    }

    /// Box-filters by `factor` (dimensions must divide).
    pub fn downscale(&self, factor: usize) -> Result<FloatTile, ComposeError> {
        if factor == 0 || !self.width.is_multiple_of(factor) || !self.height.is_multiple_of(factor)
        {
            return Err(ComposeError::Indivisible {
                width: self.width,
                height: self.height,
                factor,
            });
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let (ow, oh) = (self.width / factor, self.height / factor);
        let inv = 1.0 / (factor * factor) as f32;
        let mut rgb = vec![0f32; ow * oh * 3];
        for y in 0..self.height {
            let orow = (y / factor) * ow;
            for x in 0..self.width {
                let i = (y * self.width + x) * 3;
                let o = (orow + x / factor) * 3;
                rgb[o] += self.rgb[i];
                rgb[o + 1] += self.rgb[i + 1];
                rgb[o + 2] += self.rgb[i + 2];
            }
        }
        rgb.iter_mut().for_each(|v| *v *= inv);
        Ok(FloatTile {
            index: self.index,
            width: ow,
            height: oh,
            rgb,
        })
    }

    /// Rounds to opaque premultiplied 8-bit RGBA.
    pub fn quantize(&self) -> RgbaTile {
        RgbaTile {
            index: self.index,
            width: self.width,
            height: self.height,
            pixels: self
                .rgb
                .chunks_exact(3)
                .flat_map(|p| {
                    let q = |v: f32| (v + 0.5).clamp(0.0, 255.0) as u8;
                    [q(p[0]), q(p[1]), q(p[2]), 255]
                })
                .collect(),
        }
    }
}

/// Orders a style stack by `z_order`, rejecting duplicates.
pub fn sort_stack(stack: &[LayerStyle]) -> Result<Vec<LayerStyle>, ComposeError> {
    let mut s = stack.to_vec();
    s.sort_by_key(|l| l.z_order);
    if let Some(w) = s.windows(2).find(|w| w[0].z_order == w[1].z_order) {
        return Err(ComposeError::DuplicateZOrder(w[0].z_order));
    }
    Ok(s)
}
