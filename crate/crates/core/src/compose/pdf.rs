// SPDX-License-Identifier: Apache-2.0

//! Single-page PDF wrapper around the stitched PNG parts.
//!
//! PNG image data is already a zlib stream of filtered scanlines, which PDF
//! decodes natively with the PNG predictor. Each part's IDAT payload is
//! copied into an image XObject as is, so the pixels are never decoded or
//! resampled and memory use stays flat regardless of image size.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use super::{ComposeError, Manifest};

/// Largest page dimension PDF viewers are required to handle.
pub const MAX_PAGE_PT: f64 = 14_400.0;

const PNG_SIG: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfPage {
    pub width_pt: f64,
    pub height_pt: f64,
}

pub fn page_size_pt(width_px: usize, height_px: usize, dpi: f64) -> PdfPage {
    PdfPage {
        width_pt: width_px as f64 / dpi * 72.0,
        height_pt: height_px as f64 / dpi * 72.0,
    }
}

struct PngPart {
    width: u32,
    height: u32,
    colors: u8,
    idat: Vec<(u64, u32)>,
    idat_len: u64,
}

fn scan_png(path: &Path) -> Result<PngPart, ComposeError> {
    let name = path.display().to_string();
    let unsupported = |why: &str| ComposeError::UnsupportedPng(name.clone(), why.to_owned());
    let mut f = BufReader::new(File::open(path).map_err(|e| ComposeError::io(path, e))?);
    let mut sig = [0u8; 8];
    f.read_exact(&mut sig)
        .map_err(|e| ComposeError::io(path, e))?;
    if sig != PNG_SIG {
        return Err(unsupported("not a PNG file"));
    }
    let mut pos = 8u64;
    let mut part = None::<PngPart>;
    loop {
        let mut head = [0u8; 8];
        if f.read_exact(&mut head).is_err() {
            return Err(unsupported("missing IEND"));
        }
        let len = u32::from_be_bytes(head[..4].try_into().unwrap());
        let kind = &head[4..];
        let data_at = pos + 8;
        match kind {
            b"IHDR" => {
                let mut h = [0u8; 13];
                f.read_exact(&mut h)
                    .map_err(|e| ComposeError::io(path, e))?;
                let (depth, color, interlace) = (h[8], h[9], h[12]);
                if depth != 8 || interlace != 0 {
                    return Err(unsupported("need 8-bit non-interlaced"));
                }
                let colors = match color {
                    0 => 1,
                    2 => 3,
                    _ => return Err(unsupported("need grayscale or RGB without alpha")),
                };
                part = Some(PngPart {
                    width: u32::from_be_bytes(h[..4].try_into().unwrap()),
                    height: u32::from_be_bytes(h[4..8].try_into().unwrap()),
                    colors,
                    idat: Vec::new(),
                    idat_len: 0,
                });
                f.seek(SeekFrom::Current(len as i64 - 13 + 4))
                    .map_err(|e| ComposeError::io(path, e))?;
            }
            b"IDAT" => {
                let p = part
                    .as_mut()
                    .ok_or_else(|| unsupported("IDAT before IHDR"))?;
                p.idat.push((data_at, len));
                p.idat_len += len as u64;
                f.seek(SeekFrom::Current(len as i64 + 4))
                    .map_err(|e| ComposeError::io(path, e))?;
            }
            b"IEND" => break,
            _ => {
                f.seek(SeekFrom::Current(len as i64 + 4))
                    .map_err(|e| ComposeError::io(path, e))?;
            }
        }
        pos = data_at + len as u64 + 4;
    }
    let part = part.ok_or_else(|| unsupported("missing IHDR"))?;
    if part.idat.is_empty() {
        return Err(unsupported("no image data"));
    }
    Ok(part)
}

struct CountingWriter<W> {
    inner: W,
    pos: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.pos += n as u64;
        Ok(n)
    }
    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Writes a one-page PDF placing every manifest part at its pixel offset.
/// Part files are resolved relative to `parts_dir`.
pub fn emit_pdf(
    manifest: &Manifest,
    parts_dir: &Path,
    dpi: f64,
    out: &Path,
) -> Result<PdfPage, ComposeError> {
    if !(dpi > 0.0 && dpi.is_finite()) {
        return Err(ComposeError::BadDpi(dpi));
    }
    if manifest.parts.is_empty() {
        return Err(ComposeError::EmptyManifest);
    }
    let page = page_size_pt(manifest.width_px, manifest.height_px, dpi);
    if page.width_pt > MAX_PAGE_PT || page.height_pt > MAX_PAGE_PT {
        let longest = manifest.width_px.max(manifest.height_px) as f64;
        return Err(ComposeError::PageTooLarge {
            width_pt: page.width_pt,
            height_pt: page.height_pt,
            max: MAX_PAGE_PT,
            min_dpi: longest * 72.0 / MAX_PAGE_PT,
        });
    }

    let mut scanned = Vec::with_capacity(manifest.parts.len());
    for entry in &manifest.parts {
        let path = parts_dir.join(&entry.file);
        let part = scan_png(&path)?;
        if (part.width as usize, part.height as usize) != (entry.w, entry.h) {
            return Err(ComposeError::DimensionMismatch {
                left: (entry.w, entry.h),
                right: (part.width as usize, part.height as usize),
            });
        }
        scanned.push((path, part));
    }

    let tmp = {
        let mut s = out.as_os_str().to_owned();
        s.push(".partial");
        std::path::PathBuf::from(s)
    };
    let result = write_pdf(manifest, &scanned, dpi, page, &tmp);
    match result {
        Ok(()) => std::fs::rename(&tmp, out).map_err(|e| ComposeError::io(out, e))?,
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            return Err(e);
        }
    }
    Ok(page)
}

fn write_pdf(
    manifest: &Manifest,
    parts: &[(std::path::PathBuf, PngPart)],
    dpi: f64,
    page: PdfPage,
    tmp: &Path,
) -> Result<(), ComposeError> {
    let io = |e| ComposeError::io(tmp, e);
    let file = File::create(tmp).map_err(io)?;
    let mut w = CountingWriter {
        inner: BufWriter::with_capacity(1 << 20, file),
        pos: 0,
    };
    // objects: 1 catalog, 2 pages, 3 page, 4 content, 5.. images
    let n_obj = 4 + parts.len();
    let mut offsets = vec![0u64; n_obj + 1];

    w.write_all(b"%PDF-1.4\n%\xE2\xE3\xCF\xD3\n").map_err(io)?;

    offsets[1] = w.pos;
    write!(w, "1 0 obj\n<< /Type /Catalog /Pages 2 0 R >>\nendobj\n").map_err(io)?;
    offsets[2] = w.pos;
    write!(
        w,
        "2 0 obj\n<< /Type /Pages /Kids [3 0 R] /Count 1 >>\nendobj\n"
    )
    .map_err(io)?;

    let mut xobjects = String::new();
    for i in 0..parts.len() {
        xobjects.push_str(&format!("/Im{} {} 0 R ", i, 5 + i));
    }
    offsets[3] = w.pos;
    write!(
        w,
        "3 0 obj\n<< /Type /Page /Parent 2 0 R /MediaBox [0 0 {} {}] \
         /Resources << /XObject << {}>> >> /Contents 4 0 R >>\nendobj\n",
        num(page.width_pt),
        num(page.height_pt),
        xobjects
    )
    .map_err(io)?;

    let scale = 72.0 / dpi;
    let mut content = String::new();
    for (i, e) in manifest.parts.iter().enumerate() {
        let y_bottom = manifest.height_px - e.y - e.h;
        content.push_str(&format!(
            "q {} 0 0 {} {} {} cm /Im{} Do Q\n",
            num(e.w as f64 * scale),
            num(e.h as f64 * scale),
            num(e.x as f64 * scale),
            num(y_bottom as f64 * scale),
            i
        ));
    }
    offsets[4] = w.pos;
    write!(
        w,
        "4 0 obj\n<< /Length {} >>\nstream\n{}endstream\nendobj\n",
        content.len(),
        content
    )
    .map_err(io)?;

    let mut buf = vec![0u8; 1 << 16];
    for (i, (path, p)) in parts.iter().enumerate() {
        let obj = 5 + i;
        offsets[obj] = w.pos;
        let cs = if p.colors == 3 {
            "/DeviceRGB"
        } else {
            "/DeviceGray"
        };
        write!(
            w,
            "{obj} 0 obj\n<< /Type /XObject /Subtype /Image /Width {} /Height {} \
             /ColorSpace {cs} /BitsPerComponent 8 /Filter /FlateDecode \
             /DecodeParms << /Predictor 15 /Colors {} /BitsPerComponent 8 /Columns {} >> \
             /Length {} >>\nstream\n",
            p.width, p.height, p.colors, p.width, p.idat_len
        )
        .map_err(io)?;
        let mut src = File::open(path).map_err(|e| ComposeError::io(path, e))?;
        for &(at, len) in &p.idat {
            src.seek(SeekFrom::Start(at))
                .map_err(|e| ComposeError::io(path, e))?;
            let mut left = len as usize;
            while left > 0 {
                let n = left.min(buf.len());
                src.read_exact(&mut buf[..n])
                    .map_err(|e| ComposeError::io(path, e))?;
                w.write_all(&buf[..n]).map_err(io)?;
                left -= n;
            }
        }
        w.write_all(b"\nendstream\nendobj\n").map_err(io)?;
    }

    let xref_at = w.pos;
    write!(w, "xref\n0 {}\n0000000000 65535 f \n", n_obj + 1).map_err(io)?;
    for off in &offsets[1..] {
        writeln!(w, "{off:010} 00000 n ").map_err(io)?;
    }
    write!(
        w,
        "trailer\n<< /Size {} /Root 1 0 R >>\nstartxref\n{}\n%%EOF\n",
        n_obj + 1,
        xref_at
    )
    .map_err(io)?;
    w.flush().map_err(io)?;
    w.inner
        .into_inner()
        .map_err(|e| ComposeError::io(tmp, e.into_error()))?
        .sync_all()
        .map_err(io)
}

/// PDF real with at most four decimals and no exponent.
fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_sized_page() {
        let p = page_size_pt(1200, 2400, 300.0);
        assert_eq!((p.width_pt, p.height_pt), (288.0, 576.0));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(num(288.0), "288");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1.0 / 3.0), "0.3333");
        assert_eq!(num(0.0), "0");
    }

    #[test]
    fn empty_manifest_rejected() {
        let m = Manifest {
            width_px: 10,
            height_px: 10,
            dpi: None,
            parts: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let err = emit_pdf(&m, dir.path(), 300.0, &dir.path().join("x.pdf")).unwrap_err();
        assert!(matches!(err, ComposeError::EmptyManifest));
    }

    #[test]
    fn oversize_page_suggests_dpi() {
        let m = Manifest {
            width_px: 100_000,
            height_px: 10,
            dpi: None,
            parts: vec![super::super::PartEntry {
                file: "a.png".into(),
                x: 0,
                y: 0,
                w: 100_000,
                h: 10,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        match emit_pdf(&m, dir.path(), 300.0, &dir.path().join("x.pdf")) {
            Err(ComposeError::PageTooLarge { min_dpi, .. }) => {
                assert!((min_dpi - 500.0).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }
}
