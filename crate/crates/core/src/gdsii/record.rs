// SPDX-License-Identifier: Apache-2.0

//! Raw record framing: 2-byte big-endian length, record type, data type.

use super::GdsError;

pub const HEADER: u8 = 0x00;
pub const BGNLIB: u8 = 0x01;
pub const LIBNAME: u8 = 0x02;
pub const UNITS: u8 = 0x03;
pub const ENDLIB: u8 = 0x04;
pub const BGNSTR: u8 = 0x05;
pub const STRNAME: u8 = 0x06;
pub const ENDSTR: u8 = 0x07;
pub const BOUNDARY: u8 = 0x08;
pub const PATH: u8 = 0x09;
pub const SREF: u8 = 0x0A;
pub const AREF: u8 = 0x0B;
pub const TEXT: u8 = 0x0C;
pub const LAYER: u8 = 0x0D;
pub const DATATYPE: u8 = 0x0E;
pub const WIDTH: u8 = 0x0F;
pub const XY: u8 = 0x10;
pub const ENDEL: u8 = 0x11;
pub const SNAME: u8 = 0x12;
pub const COLROW: u8 = 0x13;
pub const NODE: u8 = 0x15;
pub const STRANS: u8 = 0x1A;
pub const MAG: u8 = 0x1B;
pub const ANGLE: u8 = 0x1C;
pub const PATHTYPE: u8 = 0x21;
pub const BOX: u8 = 0x2D;

// Data type codes.
pub const DT_NONE: u8 = 0x00;
pub const DT_BITS: u8 = 0x01;
pub const DT_I16: u8 = 0x02;
pub const DT_I32: u8 = 0x03;
pub const DT_REAL8: u8 = 0x05;
pub const DT_ASCII: u8 = 0x06;

/// A framed record, borrowed from the input stream.
#[derive(Debug, Clone, Copy)]
pub struct Record<'a> {
    pub offset: usize,
    pub rtype: u8,
    pub dtype: u8,
    pub data: &'a [u8],
}

/// A record kept verbatim for elements that are carried but not interpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub rtype: u8,
    pub dtype: u8,
    pub data: Vec<u8>,
}

impl From<Record<'_>> for RawRecord {
    fn from(r: Record<'_>) -> Self {
        RawRecord {
            rtype: r.rtype,
            dtype: r.dtype,
            data: r.data.to_vec(),
        }
    }
}

/// Forward-only record cursor. Never reads past a record's declared length.
pub struct RecordReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> RecordReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    /// Reads the next record. `Ok(None)` only at a clean end of input.
    pub fn next_record(&mut self) -> Result<Option<Record<'a>>, GdsError> {
        let offset = self.pos;
        let rest = &self.bytes[self.pos..];
        if rest.is_empty() {
            return Ok(None);
        }
        if rest.len() < 4 {
            return Err(GdsError::Truncated { offset });
        }
        let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
        if !len.is_multiple_of(2) {
            return Err(GdsError::OddLength { offset, len });
        }
        if len < 4 {
            return Err(GdsError::BadLength { offset, len });
        }
        if len > rest.len() {
            return Err(GdsError::Truncated { offset });
        }
        self.pos += len;
        Ok(Some(Record {
            offset,
            rtype: rest[2],
            dtype: rest[3],
            data: &rest[4..len],
        }))
    }

    /// Like [`next_record`](Self::next_record) but a clean end is an error.
    pub fn expect_record(&mut self) -> Result<Record<'a>, GdsError> {
        let offset = self.pos;
        self.next_record()?
            .ok_or(GdsError::MissingEndlib { offset })
    }
}

impl Record<'_> {
    pub fn i16s(&self) -> Result<Vec<i16>, GdsError> {
        if !self.data.len().is_multiple_of(2) {
            return Err(self.bad("i16 payload not a multiple of 2 bytes"));
        }
        Ok(self
            .data
            .chunks_exact(2)
            .map(|c| i16::from_be_bytes([c[0], c[1]]))
            .collect())
    }

    pub fn i32s(&self) -> Result<Vec<i32>, GdsError> {
        if !self.data.len().is_multiple_of(4) {
            return Err(self.bad("i32 payload not a multiple of 4 bytes"));
        }
        Ok(self
            .data
            .chunks_exact(4)
            .map(|c| i32::from_be_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }

    pub fn reals(&self) -> Result<Vec<f64>, GdsError> {
        if !self.data.len().is_multiple_of(8) {
            return Err(self.bad("real payload not a multiple of 8 bytes"));
        }
        Ok(self
            .data
            .chunks_exact(8)
            .map(|c| super::real8::decode(u64::from_be_bytes(c.try_into().unwrap())))
            .collect())
    }

    pub fn first_i16(&self) -> Result<i16, GdsError> {
        self.i16s()?
            .first()
            .copied()
            .ok_or_else(|| self.bad("empty integer record"))
    }

    pub fn first_real(&self) -> Result<f64, GdsError> {
        self.reals()?
            .first()
            .copied()
            .ok_or_else(|| self.bad("empty real record"))
    }

    /// ASCII payload with trailing NUL padding removed.
    pub fn string(&self) -> Result<String, GdsError> {
        let end = self.data.iter().rposition(|&b| b != 0).map_or(0, |i| i + 1);
        std::str::from_utf8(&self.data[..end])
            .map(str::to_owned)
            .map_err(|_| self.bad("string is not valid UTF-8"))
    }

    pub fn bad(&self, reason: &str) -> GdsError {
        GdsError::BadRecord {
            offset: self.offset,
            rtype: self.rtype,
            reason: reason.to_owned(),
        }
    }
}

/// Appends one framed record.
pub fn put(out: &mut Vec<u8>, rtype: u8, dtype: u8, data: &[u8]) -> Result<(), GdsError> {
    let len = data.len() + 4;
    if len > u16::MAX as usize - 1 {
        return Err(GdsError::RecordTooLong { rtype, len });
    }
    out.extend_from_slice(&(len as u16).to_be_bytes());
    out.push(rtype);
    out.push(dtype);
    out.extend_from_slice(data);
    Ok(())
}

pub fn put_empty(out: &mut Vec<u8>, rtype: u8) -> Result<(), GdsError> {
    put(out, rtype, DT_NONE, &[])
}

pub fn put_i16s(out: &mut Vec<u8>, rtype: u8, vals: &[i16]) -> Result<(), GdsError> {
    let data: Vec<u8> = vals.iter().flat_map(|v| v.to_be_bytes()).collect();
    put(out, rtype, DT_I16, &data)
}

pub fn put_i32s(out: &mut Vec<u8>, rtype: u8, vals: &[i32]) -> Result<(), GdsError> {
    let data: Vec<u8> = vals.iter().flat_map(|v| v.to_be_bytes()).collect();
    put(out, rtype, DT_I32, &data)
}

pub fn put_reals(out: &mut Vec<u8>, rtype: u8, vals: &[f64]) -> Result<(), GdsError> {
    let mut data = Vec::with_capacity(vals.len() * 8);
    for &v in vals {
        data.extend_from_slice(&super::real8::encode(v)?.to_be_bytes());
    }
    put(out, rtype, DT_REAL8, &data)
}

pub fn put_string(out: &mut Vec<u8>, rtype: u8, s: &str) -> Result<(), GdsError> {
    let mut data = s.as_bytes().to_vec();
    if !data.len().is_multiple_of(2) {
        data.push(0);
    }
    put(out, rtype, DT_ASCII, &data)
}
