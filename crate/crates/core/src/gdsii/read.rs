// SPDX-License-Identifier: Apache-2.0

use super::record::{self, Record, RecordReader};
use super::{
    ARef, Boundary, GdsDates, GdsElement, GdsError, GdsLibrary, GdsStructure, GdsTransform,
    GdsUnits, LayerKey, PathElement, Point, SRef,
};

/// Parses a complete GDSII stream.
pub fn parse_library(bytes: &[u8]) -> Result<GdsLibrary, GdsError> {
    let (lib, skipped) = parse_library_counted(bytes)?;
    if skipped > 0 {
        log::warn!("skipped {skipped} unsupported GDSII records");
    }
    Ok(lib)
}

/// Parses a stream and also returns the number of records that were
/// skipped as unsupported.
pub fn parse_library_counted(bytes: &[u8]) -> Result<(GdsLibrary, usize), GdsError> {
    let mut p = Parser {
        rd: RecordReader::new(bytes),
        skipped: 0,
    };
    let lib = p.library()?;
    Ok((lib, p.skipped))
}

type RefBody = (String, GdsTransform, Option<(u16, u16)>, Vec<Point>);

struct Parser<'a> {
    rd: RecordReader<'a>,
    skipped: usize,
}

impl<'a> Parser<'a> {
    fn library(&mut self) -> Result<GdsLibrary, GdsError> {
        let header = self
            .rd
            .next_record()?
            .ok_or(GdsError::MissingHeader { offset: 0 })?;
        if header.rtype != record::HEADER {
            return Err(GdsError::MissingHeader { offset: 0 });
        }
        let version = header.first_i16()?;

        let mut dates = GdsDates::default();
        let mut name = String::new();
        let mut units: Option<GdsUnits> = None;
        let mut structures = Vec::new();

        loop {
            let rec = self.rd.expect_record()?;
            match rec.rtype {
                record::BGNLIB => dates = parse_dates(&rec)?,
                record::LIBNAME => name = rec.string()?,
                record::UNITS => {
                    let vals = rec.reals()?;
                    if vals.len() != 2 {
                        return Err(rec.bad("UNITS needs two reals"));
                    }
                    if !(vals[0] > 0.0 && vals[1] > 0.0) {
                        return Err(rec.bad("UNITS must be positive"));
                    }
                    units = Some(GdsUnits {
                        user_unit_per_dbu: vals[0],
                        meters_per_dbu: vals[1],
                    });
                }
                record::BGNSTR => {
                    if units.is_none() {
                        return Err(GdsError::MissingUnits { offset: rec.offset });
                    }
                    structures.push(self.structure(&rec)?);
                }
                record::ENDLIB => {
                    let units = units.ok_or(GdsError::MissingUnits { offset: rec.offset })?;
                    return Ok(GdsLibrary {
                        name,
                        version,
                        dates,
                        units,
                        structures,
                    });
                }
                record::HEADER => {
                    return Err(GdsError::Unexpected {
                        offset: rec.offset,
                        rtype: rec.rtype,
                    })
                }
                // REFLIBS, FONTS, GENERATIONS, FORMAT and friends
                _ => self.skipped += 1,
            }
        }
    }

    fn structure(&mut self, bgnstr: &Record<'a>) -> Result<GdsStructure, GdsError> {
        let mut s = GdsStructure::new("");
        s.dates = parse_dates(bgnstr)?;
        loop {
            let rec = self.rd.expect_record()?;
            match rec.rtype {
                record::STRNAME => s.name = rec.string()?,
                record::ENDSTR => return Ok(s),
                record::BOUNDARY => s.elements.push(self.boundary()?),
                record::PATH => s.elements.push(self.path()?),
                record::SREF => s.elements.push(self.sref()?),
                record::AREF => s.elements.push(self.aref()?),
                record::TEXT | record::NODE | record::BOX => {
                    let mut raw = vec![rec.into()];
                    loop {
                        let r = self.rd.expect_record()?;
                        let done = r.rtype == record::ENDEL;
                        raw.push(r.into());
                        if done {
                            break;
                        }
                    }
                    s.elements.push(GdsElement::Other(raw));
                }
                record::BGNSTR | record::ENDLIB | record::HEADER => {
                    return Err(GdsError::Unexpected {
                        offset: rec.offset,
                        rtype: rec.rtype,
                    })
                }
                // members of unknown element kinds (and their ENDEL) land here too
                _ => self.skipped += 1,
            }
        }
    }

    fn boundary(&mut self) -> Result<GdsElement, GdsError> {
        let start = self.rd.offset();
        let mut layer = None;
        let mut datatype = 0u16;
        let mut xy = None;
        loop {
            let rec = self.rd.expect_record()?;
            match rec.rtype {
                record::LAYER => layer = Some(rec.first_i16()? as u16),
                record::DATATYPE => datatype = rec.first_i16()? as u16,
                record::XY => xy = Some(points(&rec)?),
                record::ENDEL => break,
                record::ENDSTR | record::BGNSTR | record::ENDLIB => {
                    return Err(GdsError::Unexpected {
                        offset: rec.offset,
                        rtype: rec.rtype,
                    })
                }
                _ => self.skipped += 1,
            }
        }
        let layer = layer.ok_or_else(|| missing(start, record::BOUNDARY, "LAYER"))?;
        let mut pts = xy.ok_or_else(|| missing(start, record::BOUNDARY, "XY"))?;
        if pts.len() >= 2 && pts.first() == pts.last() {
            pts.pop();
        }
        Ok(GdsElement::Boundary(Boundary {
            key: LayerKey::new(layer, datatype),
            points: pts,
        }))
    }

    fn path(&mut self) -> Result<GdsElement, GdsError> {
        let start = self.rd.offset();
        let mut layer = None;
        let mut datatype = 0u16;
        let mut width = 0i64;
        let mut pathtype = 0i16;
        let mut xy = None;
        loop {
            let rec = self.rd.expect_record()?;
            match rec.rtype {
                record::LAYER => layer = Some(rec.first_i16()? as u16),
                record::DATATYPE => datatype = rec.first_i16()? as u16,
                record::PATHTYPE => pathtype = rec.first_i16()?,
                record::WIDTH => {
                    width = *rec.i32s()?.first().ok_or_else(|| rec.bad("empty WIDTH"))? as i64
                }
                record::XY => xy = Some(points(&rec)?),
                record::ENDEL => break,
                record::ENDSTR | record::BGNSTR | record::ENDLIB => {
                    return Err(GdsError::Unexpected {
                        offset: rec.offset,
                        rtype: rec.rtype,
                    })
                }
                _ => self.skipped += 1,
            }
        }
        let layer = layer.ok_or_else(|| missing(start, record::PATH, "LAYER"))?;
        let pts = xy.ok_or_else(|| missing(start, record::PATH, "XY"))?;
        Ok(GdsElement::Path(PathElement {
            key: LayerKey::new(layer, datatype),
            width,
            pathtype,
            points: pts,
        }))
    }

    /// Shared body of SREF/AREF: name, transform records, COLROW and XY.
    fn reference_body(&mut self, kind: u8) -> Result<RefBody, GdsError> {
        let start = self.rd.offset();
        let mut name = None;
        let mut t = GdsTransform::default();
        let mut colrow = None;
        let mut xy = None;
        loop {
            let rec = self.rd.expect_record()?;
            match rec.rtype {
                record::SNAME => name = Some(rec.string()?),
                record::STRANS => {
                    let bits = rec
                        .data
                        .get(..2)
                        .ok_or_else(|| rec.bad("STRANS needs 2 bytes"))?;
                    t.reflect_x = bits[0] & 0x80 != 0;
                }
                record::MAG => {
                    let m = rec.first_real()?;
                    if m.is_nan() || m <= 0.0 {
                        return Err(rec.bad("magnification must be positive"));
                    }
                    t.magnification = m;
                }
                record::ANGLE => t.angle_deg = rec.first_real()?,
                record::COLROW => {
                    let v = rec.i16s()?;
                    if v.len() != 2 || v[0] < 1 || v[1] < 1 {
                        return Err(rec.bad("COLROW needs two positive counts"));
                    }
                    colrow = Some((v[0] as u16, v[1] as u16));
                }
                record::XY => xy = Some(points(&rec)?),
                record::ENDEL => break,
                record::ENDSTR | record::BGNSTR | record::ENDLIB => {
                    return Err(GdsError::Unexpected {
                        offset: rec.offset,
                        rtype: rec.rtype,
                    })
                }
                _ => self.skipped += 1,
            }
        }
        let name = name.ok_or_else(|| missing(start, kind, "SNAME"))?;
        let xy = xy.ok_or_else(|| missing(start, kind, "XY"))?;
        Ok((name, t, colrow, xy))
    }

    fn sref(&mut self) -> Result<GdsElement, GdsError> {
        let start = self.rd.offset();
        let (target, mut transform, _, xy) = self.reference_body(record::SREF)?;
        transform.translate = *xy
            .first()
            .ok_or_else(|| missing(start, record::SREF, "origin point"))?;
        Ok(GdsElement::SRef(SRef { target, transform }))
    }

    fn aref(&mut self) -> Result<GdsElement, GdsError> {
        let start = self.rd.offset();
        let (target, mut transform, colrow, xy) = self.reference_body(record::AREF)?;
        let (cols, rows) = colrow.ok_or_else(|| missing(start, record::AREF, "COLROW"))?;
        if xy.len() != 3 {
            return Err(GdsError::BadRecord {
                offset: start,
                rtype: record::AREF,
                reason: "AREF needs exactly three XY points".into(),
            });
        }
        transform.translate = xy[0];
        let col_span = xy[1] - xy[0];
        let row_span = xy[2] - xy[0];
        Ok(GdsElement::ARef(ARef {
            target,
            transform,
            cols,
            rows,
            col_step: Point::new(col_span.x / cols as i64, col_span.y / cols as i64),
            row_step: Point::new(row_span.x / rows as i64, row_span.y / rows as i64),
        }))
    }
}

fn missing(offset: usize, rtype: u8, what: &str) -> GdsError {
    GdsError::BadRecord {
        offset,
        rtype,
        reason: format!("element lacks {what}"),
    }
}

fn parse_dates(rec: &Record<'_>) -> Result<GdsDates, GdsError> {
    let v = rec.i16s()?;
    let mut d = GdsDates::default();
    if v.len() >= 12 {
        d.0.copy_from_slice(&v[..12]);
    }
    Ok(d)
}

fn points(rec: &Record<'_>) -> Result<Vec<Point>, GdsError> {
    let v = rec.i32s()?;
    if v.len() % 2 != 0 {
        return Err(rec.bad("XY has an odd number of coordinates"));
    }
    Ok(v.chunks_exact(2)
        .map(|c| Point::new(c[0] as i64, c[1] as i64))
        .collect())
}
