//! IDX binary ingestion: big-endian magic, dimension sizes, then payload.
//! Image tensors use magic 0x00000803 (unsigned bytes, 3 dimensions), label
//! vectors 0x00000801. Bytes map to gray values as byte/255.
//!
//! Both files are read fully before any size-driven allocation, and the
//! header's promised payload size is checked against what is actually
//! present, so malformed headers produce errors instead of huge allocations.

use crate::error::{Error, Result};
use crate::grid::{ClassId, Dims, GrayDataset, GrayGrid};
use std::fs;
use std::path::Path;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn parse_err(offset: usize, msg: impl Into<String>) -> Error {
    Error::IdxParse {
        offset,
        msg: msg.into(),
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(parse_err(
            bytes.len(),
            format!(
                "truncated: need {end} header bytes, file has {}",
                bytes.len()
            ),
        ));
    }
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

struct ImageFile {
    dims: Dims,
    count: usize,
    payload: Vec<u8>,
}

fn parse_images(bytes: &[u8]) -> Result<ImageFile> {
    let magic = read_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(parse_err(
            0,
            format!("image magic must be {IMAGE_MAGIC:#010x}, got {magic:#010x}"),
        ));
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    if rows == 0 || cols == 0 {
        return Err(parse_err(8, format!("zero image dimensions {cols}x{rows}")));
    }
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| parse_err(4, "declared sizes overflow"))?;
    let payload = &bytes[16..];
    if payload.len() != expected {
        return Err(parse_err(
            16,
            format!(
                "payload has {} bytes, header promises {expected}",
                payload.len()
            ),
        ));
    }
    Ok(ImageFile {
        dims: Dims::new(cols, rows),
        count,
        payload: payload.to_vec(),
    })
}

fn parse_labels(bytes: &[u8]) -> Result<Vec<ClassId>> {
    let magic = read_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(parse_err(
            0,
            format!("label magic must be {LABEL_MAGIC:#010x}, got {magic:#010x}"),
        ));
    }
    let count = read_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != count {
        return Err(parse_err(
            8,
            format!(
                "payload has {} bytes, header promises {count}",
                payload.len()
            ),
        ));
    }
    Ok(payload.iter().map(|&b| b as ClassId).collect())
}

/// Parses an image file and a label file into a grayscale dataset with
/// values in [0, 1].
pub fn parse_idx(image_bytes: &[u8], label_bytes: &[u8]) -> Result<GrayDataset> {
    let images = parse_images(image_bytes)?;
    let labels = parse_labels(label_bytes)?;
    if images.count != labels.len() {
        return Err(parse_err(
            4,
            format!(
                "image count {} does not match label count {}",
                images.count,
                labels.len()
            ),
        ));
    }
    if images.count == 0 {
        return Err(Error::EmptyDataset);
    }
    let cell_count = images.dims.cell_count();
    let mut items = Vec::with_capacity(images.count);
    for (i, &label) in labels.iter().enumerate() {
        let values = images.payload[i * cell_count..(i + 1) * cell_count]
            .iter()
            .map(|&b| b as f64 / 255.0)
            .collect();
        items.push((GrayGrid::new(images.dims, values)?, label));
    }
    let class_count = labels.iter().max().copied().unwrap_or(0) + 1;
    Ok(GrayDataset {
        class_count,
        dims: images.dims,
        items,
    })
}

/// Loads an IDX image/label file pair from disk.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<GrayDataset> {
    let image_bytes = fs::read(images_path)?;
    let label_bytes = fs::read(labels_path)?;
    parse_idx(&image_bytes, &label_bytes)
}
