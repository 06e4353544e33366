//! Grayscale image export: binary PGM (P5) as the bit-exact reference
//! format, PNG behind the same interface.

use std::fs;
use std::path::Path;

use crate::error::Error;
use crate::tensor::Tensor;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFileFormat {
    Pgm,
    Png,
}

/// Writes a 2-D tensor as an 8-bit grayscale image. Pixels must lie in
/// `[0, 255]`; they are rounded to the nearest integer (halves away from
/// zero), so a re-import recovers the rounded values exactly.
pub fn export_image(t: &Tensor, path: &Path, format: ImageFileFormat) -> Result<()> {
    let (h, w) = match t.shape() {
        [h, w] => (*h, *w),
        other => {
            return Err(Error::invalid(format!("expected a 2-D image tensor, got {other:?}")))
        }
    };
    let mut bytes = Vec::with_capacity(h * w);
    for &v in t.data() {
        if !(0.0..=255.0).contains(&v) {
            return Err(Error::invalid(format!(
                "pixel value {v} outside [0, 255]; clamp before exporting"
            )));
        }
        bytes.push(v.round() as u8);
    }

    match format {
        ImageFileFormat::Pgm => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&bytes);
            fs::write(path, out)?;
        }
        ImageFileFormat::Png => {
            let img = image::GrayImage::from_raw(w as u32, h as u32, bytes)
                .expect("buffer length matches dimensions");
            img.save_with_format(path, image::ImageFormat::Png)
                .map_err(|e| Error::format(format!("png encode: {e}")))?;
        }
    }
    Ok(())
}

/// Reads back a binary (P5) PGM file written by `export_image`.
pub fn read_pgm(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path)?;
    let name = path.display();
    let header_err = |msg: &str| Error::format(format!("{name}: {msg}"));

    if !bytes.starts_with(b"P5") {
        return Err(header_err("not a binary PGM (missing P5 magic)"));
    }
    // Header: magic, width, height, maxval as whitespace-separated tokens.
    let mut pos = 2;
    let mut fields = Vec::with_capacity(3);
    while fields.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(header_err("truncated header"));
        }
        let token = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| header_err("non-ascii header"))?;
        fields.push(
            token
                .parse::<usize>()
                .map_err(|_| header_err("non-numeric header field"))?,
        );
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(header_err("only 8-bit (maxval 255) PGM is supported"));
    }
    if bytes.len() != pos + w * h {
        return Err(header_err(&format!(
            "payload length {} does not match {w}x{h}",
            bytes.len().saturating_sub(pos)
        )));
    }
    let data: Vec<f64> = bytes[pos..].iter().map(|&b| b as f64).collect();
    Tensor::new(vec![h, w], data)
}
