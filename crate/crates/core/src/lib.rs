// SPDX-License-Identifier: Apache-2.0

//! Chip-art generation and tiled high-resolution rendering of GDSII layouts.
//!
//! The crate is organized along the flow it implements:
//!
//! * [`gdsii`] reads and writes GDSII streams, extracts layers and merges
//!   libraries.
//! * [`geom`] flattens the cell hierarchy into layer-tagged polygons and
//!   builds occupancy grids and per-tile polygon buckets.
//! * [`meerkat`] turns a logo bitmap into design-rule-clean polyomino metal
//!   art on the top metal layer, and verifies the result.
//! * [`raster`] plans a tile grid under a per-tile pixel cap and rasterizes
//!   per-layer coverage tiles.
//! * [`compose`] colors and alpha-composites layer tiles, downsamples,
//!   stitches tiles into PNG output and wraps it in a PDF page.
//!
//! Work over tiles, density windows and shape pairs runs through
//! [`exec::Exec`], which uses rayon when the `parallel` feature is on.

pub mod compose;
pub mod coord;
pub mod exec;
pub mod gdsii;
pub mod geom;
pub mod meerkat;
pub mod raster;
pub mod synth;

pub use coord::{Point, Rect};
pub use exec::Exec;
pub use gdsii::{GdsLibrary, LayerKey};
