// SPDX-License-Identifier: Apache-2.0

//! Logo-to-metal art generation.
//!
//! A logo is thresholded to a bit matrix, resampled onto a lattice of
//! pitch `cell_size + gap` covering the placement rectangle, and tiled
//! greedily with small polyominoes. Cells of one shape are joined across the
//! gutter; distinct shapes keep it, which is what makes the result
//! spacing-clean without a solver. Whole shapes are then dropped, in a
//! seeded order, until every density window is under the limit.
//!
//! [`check_drc`] re-verifies an output from the polygons alone.

mod drc;
mod export;
mod generate;
mod grid;
mod image;
mod shapes;

pub use drc::{check_drc, check_drc_with, density_windows, DrcReport, Violation};
pub use export::{export_art_gds, export_svg, ART_LIBRARY, ART_STRUCTURE};
pub use generate::{generate_art, thin_density, tile_art};
pub use grid::{map_logo_to_grid, InkGrid};
pub use image::{image_to_bw, load_logo, BwImage, RgbaImage};
pub use shapes::{shape_catalog, shape_outline, ShapeKind};

use serde::{Deserialize, Serialize};

use crate::coord::Rect;
use crate::geom::FlatPolygon;

#[derive(Debug, thiserror::Error)]
pub enum ArtError {
    #[error("invalid art rules: {0}")]
    Rules(String),
    #[error("logo aspect {logo:.4} differs from placement aspect {placement:.4} by more than 1%")]
    AspectMismatch { logo: f64, placement: f64 },
    #[error("placement yields a {cols}x{rows} grid; at least 2x2 cells are needed")]
    GridTooSmall { cols: usize, rows: usize },
    #[error("occupancy grid does not match the ink grid (origin, pitch or size)")]
    GridMismatch,
    #[error("logo image is empty")]
    EmptyImage,
    #[error("logo: {0}")]
    Image(String),
}

/// Geometry and density rules for art generation, all lengths in dbu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtRules {
    /// Side of the drawn square in each lattice cell.
    pub cell_size: i64,
    /// Gutter between neighbouring cells.
    pub gap: i64,
    #[serde(default = "default_min_cells")]
    pub min_cells: u8,
    #[serde(default = "default_max_cells")]
    pub max_cells: u8,
    /// Clearance kept from existing top-metal geometry.
    #[serde(default)]
    pub keepout: i64,
    /// Density window edge, in lattice cells.
    pub density_window: usize,
    pub max_density: f64,
    #[serde(default)]
    pub seed: u64,
    /// Foundry minimum spacing; defaults to `gap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_spacing: Option<i64>,
    /// Foundry minimum width; defaults to `cell_size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_width: Option<i64>,
    /// Foundry maximum width; defaults to `2 * cell_size + gap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_width: Option<i64>,
}

fn default_min_cells() -> u8 {
    1
}

fn default_max_cells() -> u8 {
    4
}

impl ArtRules {
    pub fn new(cell_size: i64, gap: i64) -> Self {
        Self {
            cell_size,
            gap,
            min_cells: 1,
            max_cells: 4,
            keepout: 0,
            density_window: 10,
            max_density: 1.0,
            seed: 0,
            min_spacing: None,
            min_width: None,
            max_width: None,
        }
    }

    pub fn pitch(&self) -> i64 {
        self.cell_size + self.gap
    }

    pub fn validate(&self) -> Result<(), ArtError> {
        let bad = |m: String| Err(ArtError::Rules(m));
        if self.cell_size <= 0 || self.gap <= 0 {
            return bad(format!(
                "cell_size ({}) and gap ({}) must be positive",
                self.cell_size, self.gap
            ));
        }
        if !(1 <= self.min_cells && self.min_cells <= self.max_cells && self.max_cells <= 4) {
            return bad(format!(
                "need 1 <= min_cells ({}) <= max_cells ({}) <= 4",
                self.min_cells, self.max_cells
            ));
        }
        if self.keepout < 0 {
            return bad(format!("keepout ({}) must be non-negative", self.keepout));
        }
        if self.density_window == 0 {
            return bad("density_window must be at least one cell".into());
        }
        if !(self.max_density > 0.0 && self.max_density <= 1.0) {
            return bad(format!(
                "max_density ({}) must be in (0, 1]",
                self.max_density
            ));
        }
        if let Some(s) = self.min_spacing {
            if self.gap < s {
                return bad(format!("gap ({}) is below min_spacing ({s})", self.gap));
            }
        }
        if let Some(w) = self.min_width {
            if self.cell_size < w {
                return bad(format!(
                    "cell_size ({}) is below min_width ({w})",
                    self.cell_size
                ));
            }
        }
        if let Some(w) = self.max_width {
            let widest = 2 * self.cell_size + self.gap;
            if widest > w {
                return bad(format!(
                    "2*cell_size + gap ({widest}) exceeds max_width ({w})"
                ));
            }
        }
        Ok(())
    }
}

/// One placed art shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtPolyomino {
    pub kind: ShapeKind,
    /// Lattice cells `(col, row)`, in scan order.
    pub cells: Vec<(usize, usize)>,
    pub polygon: FlatPolygon,
}

impl ArtPolyomino {
    pub fn bbox(&self) -> Rect {
        self.polygon.bbox
    }
}
