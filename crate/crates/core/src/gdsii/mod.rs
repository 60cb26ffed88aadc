// SPDX-License-Identifier: Apache-2.0

//! GDSII stream reading and writing, plus the two library-level edits the
//! art flow needs: single-layer extraction and library merging.
//!
//! Geometry is held on GDSII's own terms: named structures holding
//! boundaries, paths and (array) references. TEXT, NODE and BOX elements
//! are kept verbatim so that a parse/write cycle preserves them, but they
//! carry no area and are ignored by flattening.

mod ops;
mod read;
pub mod real8;
pub mod record;
mod write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::coord::Point;
pub use ops::{extract_layer, merge_libraries, top_structures};
pub use read::{parse_library, parse_library_counted};
pub use write::write_library;

#[derive(Debug, Error)]
pub enum GdsError {
    #[error("truncated record at byte offset {offset}")]
    Truncated { offset: usize },
    #[error("odd record length {len} at byte offset {offset}")]
    OddLength { offset: usize, len: usize },
    #[error("record length {len} below header size at byte offset {offset}")]
    BadLength { offset: usize, len: usize },
    #[error("stream ends without ENDLIB (byte offset {offset})")]
    MissingEndlib { offset: usize },
    #[error("no UNITS record before byte offset {offset}")]
    MissingUnits { offset: usize },
    #[error("stream does not begin with a HEADER record (byte offset {offset})")]
    MissingHeader { offset: usize },
    #[error("unexpected record type 0x{rtype:02x} at byte offset {offset}")]
    Unexpected { offset: usize, rtype: u8 },
    #[error("malformed record 0x{rtype:02x} at byte offset {offset}: {reason}")]
    BadRecord {
        offset: usize,
        rtype: u8,
        reason: String,
    },
    #[error("record 0x{rtype:02x} would be {len} bytes, above the 65534-byte limit")]
    RecordTooLong { rtype: u8, len: usize },
    #[error("coordinate {value} in structure {structure:?} does not fit 32 bits")]
    CoordinateOverflow { structure: String, value: i64 },
    #[error("name {0:?} is longer than 32 bytes")]
    NameTooLong(String),
    #[error("invalid element in structure {structure:?}: {reason}")]
    InvalidElement { structure: String, reason: String },
    #[error("real value {0} is not representable")]
    RealOutOfRange(f64),
    #[error("database units differ: {base} m vs {art} m per dbu")]
    UnitMismatch { base: f64, art: f64 },
    #[error("structure {0:?} not found")]
    MissingStructure(String),
    #[error("library {0:?} has no top-level structure")]
    NoTopStructure(String),
}

/// Layer/datatype pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LayerKey {
    pub layer: u16,
    pub datatype: u16,
}

impl LayerKey {
    pub const fn new(layer: u16, datatype: u16) -> Self {
        Self { layer, datatype }
    }
}

impl std::fmt::Display for LayerKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.layer, self.datatype)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdsUnits {
    /// User units per database unit (commonly 1e-3: 1 dbu = 1 nm = 1e-3 µm).
    pub user_unit_per_dbu: f64,
    pub meters_per_dbu: f64,
}

impl Default for GdsUnits {
    fn default() -> Self {
        Self {
            user_unit_per_dbu: 1e-3,
            meters_per_dbu: 1e-9,
        }
    }
}

impl GdsUnits {
    pub fn nm_per_dbu(&self) -> f64 {
        self.meters_per_dbu * 1e9
    }
}

/// Modification and access timestamps carried by BGNLIB/BGNSTR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GdsDates(pub [i16; 12]);

impl Default for GdsDates {
    /// A fixed date keeps written streams reproducible.
    fn default() -> Self {
        GdsDates([2000, 1, 1, 0, 0, 0, 2000, 1, 1, 0, 0, 0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdsLibrary {
    pub name: String,
    pub version: i16,
    pub dates: GdsDates,
    pub units: GdsUnits,
    pub structures: Vec<GdsStructure>,
}

impl GdsLibrary {
    pub fn new(name: impl Into<String>, units: GdsUnits) -> Self {
        Self {
            name: name.into(),
            version: 600,
            dates: GdsDates::default(),
            units,
            structures: Vec::new(),
        }
    }

    pub fn structure(&self, name: &str) -> Option<&GdsStructure> {
        self.structures.iter().find(|s| s.name == name)
    }

    pub fn structure_mut(&mut self, name: &str) -> Option<&mut GdsStructure> {
        self.structures.iter_mut().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdsStructure {
    pub name: String,
    pub dates: GdsDates,
    pub elements: Vec<GdsElement>,
}

impl GdsStructure {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            dates: GdsDates::default(),
            elements: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GdsElement {
    Boundary(Boundary),
    Path(PathElement),
    SRef(SRef),
    ARef(ARef),
    /// TEXT, NODE or BOX, kept as raw records (element header through ENDEL).
    Other(Vec<record::RawRecord>),
}

impl GdsElement {
    pub fn layer_key(&self) -> Option<LayerKey> {
        match self {
            GdsElement::Boundary(b) => Some(b.key),
            GdsElement::Path(p) => Some(p.key),
            _ => None,
        }
    }
}

/// Closed polygon. `points` holds each vertex once; the closing point is
/// added on write and stripped on read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pub key: LayerKey,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathElement {
    pub key: LayerKey,
    pub width: i64,
    /// 0 flush, 1 round, 2 half-width extension.
    pub pathtype: i16,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdsTransform {
    pub reflect_x: bool,
    pub magnification: f64,
    pub angle_deg: f64,
    pub translate: Point,
}

impl Default for GdsTransform {
    fn default() -> Self {
        Self {
            reflect_x: false,
            magnification: 1.0,
            angle_deg: 0.0,
            translate: Point::default(),
        }
    }
}

impl GdsTransform {
    pub fn translate(x: i64, y: i64) -> Self {
        Self {
            translate: Point::new(x, y),
            ..Self::default()
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SRef {
    pub target: String,
    pub transform: GdsTransform,
}

/// Array reference. Instance `(c, r)` sits at
/// `transform.translate + c * col_step + r * row_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct ARef {
    pub target: String,
    pub transform: GdsTransform,
    pub cols: u16,
    pub rows: u16,
    pub col_step: Point,
    pub row_step: Point,
}
