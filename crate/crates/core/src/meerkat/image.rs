// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use super::ArtError;

/// Straight-alpha RGBA raster, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbaImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// One bit per pixel, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BwImage {
    pub width: usize,
    pub height: usize,
    pub ink: Vec<bool>,
}

impl BwImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            ink: vec![false; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.ink[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.ink[y * self.width + x] = v;
    }
}

pub fn load_logo(path: &Path) -> Result<RgbaImage, ArtError> {
    let (width, height, pixels) =
        crate::compose::read_png_rgba(path).map_err(|e| ArtError::Image(e.to_string()))?;
    if width == 0 || height == 0 {
        return Err(ArtError::EmptyImage);
    }
    Ok(RgbaImage {
        width,
        height,
        pixels,
    })
}

// Rec. 709 luma weights scaled to sum to 10000
const LUMA: [u64; 3] = [2126, 7152, 722];

/// Thresholds Rec. 709 luma after compositing over white; ink is `luma < threshold`.
pub fn image_to_bw(image: &RgbaImage, threshold: u8) -> BwImage {
    let limit = threshold as u64 * 10_000 * 255;
    let ink = image
        .pixels
        .chunks_exact(4)
        .map(|p| {
            let a = p[3] as u64;
            let luma: u64 = (0..3)
                .map(|c| LUMA[c] * (p[c] as u64 * a + 255 * (255 - a)))
                .sum();
            luma < limit
        })
        .collect();
    BwImage {
        width: image.width,
        height: image.height,
        ink,
    }
}
