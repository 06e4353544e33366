//! IDX container reader/writer (the MNIST family layout): big-endian magic,
//! big-endian dimension sizes, then raw unsigned bytes.

use std::fs;
use std::path::Path;

use crate::error::Error;
use crate::net::LabeledExample;
use crate::tensor::Tensor;
use crate::Result;

use super::Dataset;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Loads an images/labels pair of IDX files into a dataset. Pixel bytes are
/// widened to floats in `[0, 255]`; the class count is the largest label
/// plus one.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let (images, rows, cols) = read_images(images_path)?;
    let labels = read_labels(labels_path)?;
    if images.len() != labels.len() {
        return Err(Error::format(format!(
            "{} holds {} images but {} holds {} labels",
            images_path.display(),
            images.len(),
            labels_path.display(),
            labels.len()
        )));
    }

    let class_count = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let examples: Vec<LabeledExample> = images
        .into_iter()
        .zip(labels)
        .map(|(pixels, label)| LabeledExample {
            image: Tensor::new(vec![rows, cols], pixels).expect("bytes are finite"),
            label: label as usize,
        })
        .collect();

    let name = images_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".to_string());
    Dataset::new(examples, class_count, name, "unknown")
}

fn read_images(path: &Path) -> Result<(Vec<Vec<f64>>, usize, usize)> {
    let bytes = fs::read(path)?;
    let name = path.display();
    if bytes.len() < 16 {
        return Err(Error::format(format!("{name}: too short for an IDX image header")));
    }
    let magic = be_u32(&bytes[0..4]);
    if magic != IMAGE_MAGIC {
        return Err(Error::format(format!(
            "{name}: bad magic {magic:#010x}, expected {IMAGE_MAGIC:#010x}"
        )));
    }
    let count = be_u32(&bytes[4..8]) as usize;
    let rows = be_u32(&bytes[8..12]) as usize;
    let cols = be_u32(&bytes[12..16]) as usize;
    let expected = 16 + count * rows * cols;
    if bytes.len() != expected {
        return Err(Error::format(format!(
            "{name}: declares {count} images of {rows}x{cols} ({expected} bytes) but the file has {}",
            bytes.len()
        )));
    }

    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let start = 16 + i * rows * cols;
        images.push(bytes[start..start + rows * cols].iter().map(|&b| b as f64).collect());
    }
    Ok((images, rows, cols))
}

fn read_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path)?;
    let name = path.display();
    if bytes.len() < 8 {
        return Err(Error::format(format!("{name}: too short for an IDX label header")));
    }
    let magic = be_u32(&bytes[0..4]);
    if magic != LABEL_MAGIC {
        return Err(Error::format(format!(
            "{name}: bad magic {magic:#010x}, expected {LABEL_MAGIC:#010x}"
        )));
    }
    let count = be_u32(&bytes[4..8]) as usize;
    if bytes.len() != 8 + count {
        return Err(Error::format(format!(
            "{name}: declares {count} labels but the file has {} payload bytes",
            bytes.len() - 8
        )));
    }
    Ok(bytes[8..].to_vec())
}

/// Writes images (pixels must already be integral values in `[0, 255]`,
/// e.g. straight from `load_idx` or a generator) as an IDX image file.
pub fn write_idx_images(images: &[Tensor], path: &Path) -> Result<()> {
    let (rows, cols) = match images.first() {
        None => return Err(Error::invalid("no images to write")),
        Some(t) => match t.shape() {
            [r, c] => (*r, *c),
            other => return Err(Error::invalid(format!("expected 2-D images, got {other:?}"))),
        },
    };
    let mut bytes = Vec::with_capacity(16 + images.len() * rows * cols);
    bytes.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(images.len() as u32).to_be_bytes());
    bytes.extend_from_slice(&(rows as u32).to_be_bytes());
    bytes.extend_from_slice(&(cols as u32).to_be_bytes());
    for (i, img) in images.iter().enumerate() {
        if img.shape() != [rows, cols] {
            return Err(Error::invalid(format!("image {i} has mismatched shape")));
        }
        for &v in img.data() {
            if !(0.0..=255.0).contains(&v) {
                return Err(Error::invalid(format!("image {i} has pixel {v} outside [0, 255]")));
            }
            bytes.push(v.round() as u8);
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Writes labels as an IDX label file.
pub fn write_idx_labels(labels: &[usize], path: &Path) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::invalid("no labels to write"));
    }
    let mut bytes = Vec::with_capacity(8 + labels.len());
    bytes.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    for (i, &l) in labels.iter().enumerate() {
        if l > u8::MAX as usize {
            return Err(Error::invalid(format!("label {l} at index {i} exceeds one byte")));
        }
        bytes.push(l as u8);
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn be_u32(bytes: &[u8]) -> u32 {
    u32::from_be_bytes(bytes.try_into().expect("4 bytes"))
}
