// SPDX-License-Identifier: Apache-2.0

use super::record::{self as rec};
use super::{GdsElement, GdsError, GdsLibrary, GdsTransform, Point};

const MAX_NAME: usize = 32;

/// Serializes a library to a GDSII stream.
pub fn write_library(lib: &GdsLibrary) -> Result<Vec<u8>, GdsError> {
    let mut out = Vec::new();
    rec::put_i16s(&mut out, rec::HEADER, &[lib.version])?;
    rec::put_i16s(&mut out, rec::BGNLIB, &lib.dates.0)?;
    rec::put_string(&mut out, rec::LIBNAME, &lib.name)?;
    rec::put_reals(
        &mut out,
        rec::UNITS,
        &[lib.units.user_unit_per_dbu, lib.units.meters_per_dbu],
    )?;
    for s in &lib.structures {
        if s.name.is_empty() || s.name.len() > MAX_NAME {
            return Err(GdsError::NameTooLong(s.name.clone()));
        }
        rec::put_i16s(&mut out, rec::BGNSTR, &s.dates.0)?;
        rec::put_string(&mut out, rec::STRNAME, &s.name)?;
        for e in &s.elements {
            write_element(&mut out, &s.name, e)?;
        }
        rec::put_empty(&mut out, rec::ENDSTR)?;
    }
    rec::put_empty(&mut out, rec::ENDLIB)?;
    Ok(out)
}

fn write_element(out: &mut Vec<u8>, structure: &str, e: &GdsElement) -> Result<(), GdsError> {
    let invalid = |reason: &str| GdsError::InvalidElement {
        structure: structure.to_owned(),
        reason: reason.to_owned(),
    };
    match e {
        GdsElement::Boundary(b) => {
            if b.points.len() < 3 {
                return Err(invalid("boundary with fewer than 3 vertices"));
            }
            rec::put_empty(out, rec::BOUNDARY)?;
            rec::put_i16s(out, rec::LAYER, &[b.key.layer as i16])?;
            rec::put_i16s(out, rec::DATATYPE, &[b.key.datatype as i16])?;
            let mut pts = b.points.clone();
            pts.push(b.points[0]);
            put_xy(out, structure, &pts)?;
        }
        GdsElement::Path(p) => {
            if p.points.len() < 2 {
                return Err(invalid("path with fewer than 2 points"));
            }
            if p.width < 0 {
                return Err(invalid("negative path width"));
            }
            rec::put_empty(out, rec::PATH)?;
            rec::put_i16s(out, rec::LAYER, &[p.key.layer as i16])?;
            rec::put_i16s(out, rec::DATATYPE, &[p.key.datatype as i16])?;
            if p.pathtype != 0 {
                rec::put_i16s(out, rec::PATHTYPE, &[p.pathtype])?;
            }
            rec::put_i32s(out, rec::WIDTH, &[fit(structure, p.width)?])?;
            put_xy(out, structure, &p.points)?;
        }
        GdsElement::SRef(r) => {
            rec::put_empty(out, rec::SREF)?;
            put_name(out, &r.target)?;
            put_strans(out, &r.transform)?;
            put_xy(out, structure, &[r.transform.translate])?;
        }
        GdsElement::ARef(a) => {
            rec::put_empty(out, rec::AREF)?;
            put_name(out, &a.target)?;
            put_strans(out, &a.transform)?;
            rec::put_i16s(out, rec::COLROW, &[a.cols as i16, a.rows as i16])?;
            let o = a.transform.translate;
            let col_end = Point::new(
                o.x + a.col_step.x * a.cols as i64,
                o.y + a.col_step.y * a.cols as i64,
            );
            let row_end = Point::new(
                o.x + a.row_step.x * a.rows as i64,
                o.y + a.row_step.y * a.rows as i64,
            );
            put_xy(out, structure, &[o, col_end, row_end])?;
        }
        GdsElement::Other(records) => {
            for r in records {
                rec::put(out, r.rtype, r.dtype, &r.data)?;
            }
            return Ok(());
        }
    }
    rec::put_empty(out, rec::ENDEL)
}

fn put_name(out: &mut Vec<u8>, name: &str) -> Result<(), GdsError> {
    if name.len() > MAX_NAME {
        return Err(GdsError::NameTooLong(name.to_owned()));
    }
    rec::put_string(out, rec::SNAME, name)
}

fn put_strans(out: &mut Vec<u8>, t: &GdsTransform) -> Result<(), GdsError> {
    if !t.reflect_x && t.magnification == 1.0 && t.angle_deg == 0.0 {
        return Ok(());
    }
    let flags: u16 = if t.reflect_x { 0x8000 } else { 0 };
    rec::put(out, rec::STRANS, rec::DT_BITS, &flags.to_be_bytes())?;
    if t.magnification != 1.0 {
        rec::put_reals(out, rec::MAG, &[t.magnification])?;
    }
    if t.angle_deg != 0.0 {
        rec::put_reals(out, rec::ANGLE, &[t.angle_deg])?;
    }
    Ok(())
}

fn put_xy(out: &mut Vec<u8>, structure: &str, pts: &[Point]) -> Result<(), GdsError> {
    let mut vals = Vec::with_capacity(pts.len() * 2);
    for p in pts {
        vals.push(fit(structure, p.x)?);
        vals.push(fit(structure, p.y)?);
    }
    rec::put_i32s(out, rec::XY, &vals)
}

fn fit(structure: &str, v: i64) -> Result<i32, GdsError> {
    i32::try_from(v).map_err(|_| GdsError::CoordinateOverflow {
        structure: structure.to_owned(),
        value: v,
    })
}
