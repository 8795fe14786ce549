//! IDX container parsing (the MNIST distribution format).
//!
//! Image files (IDX3): big-endian magic `0x00000803`, then item count, row
//! count and column count as big-endian `u32`, then one unsigned byte per
//! pixel, row-major, image after image. Label files (IDX1): magic
//! `0x00000801`, item count, one byte per label. Parsing is total: every
//! input either parses completely or fails with the byte offset of the
//! problem.

use crate::error::{DicaError, Result};
use std::path::Path;

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

/// Raw 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, offset: 0 }
    }

    fn read_u32(&mut self, what: &str) -> Result<u32> {
        let end = self.offset + 4;
        if end > self.bytes.len() {
            return Err(DicaError::format_at(
                self.offset,
                format!("truncated file while reading {what}"),
            ));
        }
        let value = u32::from_be_bytes(self.bytes[self.offset..end].try_into().unwrap());
        self.offset = end;
        Ok(value)
    }

    fn read_bytes(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .offset
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                DicaError::format_at(
                    self.offset,
                    format!("truncated file while reading {what}"),
                )
            })?;
        let slice = &self.bytes[self.offset..end];
        self.offset = end;
        Ok(slice)
    }

    fn expect_end(&self) -> Result<()> {
        if self.offset != self.bytes.len() {
            return Err(DicaError::format_at(
                self.offset,
                format!("{} trailing bytes after the declared items", self.bytes.len() - self.offset),
            ));
        }
        Ok(())
    }
}

/// Parse an IDX3 image file from memory.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>> {
    let mut reader = Reader::new(bytes);
    let magic = reader.read_u32("magic number")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(DicaError::format_at(
            0,
            format!("bad image magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}"),
        ));
    }
    let count = reader.read_u32("item count")? as usize;
    let rows = reader.read_u32("row count")? as usize;
    let cols = reader.read_u32("column count")? as usize;
    let pixels_per_image = rows
        .checked_mul(cols)
        .ok_or_else(|| DicaError::format_at(8, "image dimensions overflow"))?;
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let pixels = reader.read_bytes(pixels_per_image, &format!("image {i}"))?;
        images.push(GrayImage {
            width: cols,
            height: rows,
            pixels: pixels.to_vec(),
        });
    }
    reader.expect_end()?;
    Ok(images)
}

/// Parse an IDX1 label file from memory. Labels must be valid MNIST
/// classes (0..=9).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut reader = Reader::new(bytes);
    let magic = reader.read_u32("magic number")?;
    if magic != IDX_LABEL_MAGIC {
        return Err(DicaError::format_at(
            0,
            format!("bad label magic {magic:#010x}, expected {IDX_LABEL_MAGIC:#010x}"),
        ));
    }
    let count = reader.read_u32("item count")? as usize;
    let offset = reader.offset;
    let labels = reader.read_bytes(count, "labels")?.to_vec();
    reader.expect_end()?;
    for (i, &label) in labels.iter().enumerate() {
        if label > 9 {
            return Err(DicaError::format_at(
                offset + i,
                format!("label {label} out of range 0..=9"),
            ));
        }
    }
    Ok(labels)
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Vec<GrayImage>> {
    parse_idx_images(&std::fs::read(path)?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&std::fs::read(path)?)
}

/// Serialize images into IDX3 bytes. All images must share one geometry.
pub fn write_idx_images(images: &[GrayImage]) -> Result<Vec<u8>> {
    let (width, height) = match images.first() {
        Some(first) => (first.width, first.height),
        None => (0, 0),
    };
    let mut out = Vec::new();
    out.extend_from_slice(&IDX_IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(height as u32).to_be_bytes());
    out.extend_from_slice(&(width as u32).to_be_bytes());
    for image in images {
        if image.width != width || image.height != height || image.pixels.len() != width * height
        {
            return Err(DicaError::Invalid(
                "all images in an IDX file must share the same geometry".into(),
            ));
        }
        out.extend_from_slice(&image.pixels);
    }
    Ok(out)
}

/// Serialize labels into IDX1 bytes.
pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_fixture() -> Vec<u8> {
        // One 2x2 image with pixels [0, 255, 128, 7].
        let mut bytes = vec![];
        bytes.extend_from_slice(&0x0000_0803u32.to_be_bytes());
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&[0, 255, 128, 7]);
        bytes
    }

    #[test]
    fn parses_hand_encoded_image_fixture() {
        let images = parse_idx_images(&image_fixture()).unwrap();
        assert_eq!(images.len(), 1);
        assert_eq!(images[0].width, 2);
        assert_eq!(images[0].height, 2);
        assert_eq!(images[0].pixels, vec![0, 255, 128, 7]);
    }

    #[test]
    fn rejects_label_magic_in_image_loader() {
        let mut bytes = image_fixture();
        bytes[..4].copy_from_slice(&0x0000_0801u32.to_be_bytes());
        let err = parse_idx_images(&bytes).unwrap_err();
        assert!(matches!(err, DicaError::Format(_)));
        assert!(err.to_string().contains("magic"));
    }

    #[test]
    fn rejects_empty_and_truncated_files() {
        assert!(matches!(parse_idx_images(&[]), Err(DicaError::Format(_))));
        let mut bytes = image_fixture();
        bytes.truncate(bytes.len() - 1);
        let err = parse_idx_images(&bytes).unwrap_err();
        assert!(err.to_string().contains("at byte 16"), "{err}");
    }

    #[test]
    fn rejects_trailing_bytes() {
        let mut bytes = image_fixture();
        bytes.push(0);
        let err = parse_idx_images(&bytes).unwrap_err();
        assert!(err.to_string().contains("trailing"), "{err}");
    }

    #[test]
    fn label_fixture_roundtrips() {
        let bytes = write_idx_labels(&[5, 0, 4]);
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![5, 0, 4]);
    }

    #[test]
    fn rejects_out_of_range_labels() {
        let bytes = write_idx_labels(&[5, 10, 4]);
        let err = parse_idx_labels(&bytes).unwrap_err();
        assert!(err.to_string().contains("label 10"), "{err}");
        assert!(err.to_string().contains("at byte 9"), "{err}");
    }

    #[test]
    fn image_roundtrip_preserves_bytes() {
        let images = parse_idx_images(&image_fixture()).unwrap();
        assert_eq!(write_idx_images(&images).unwrap(), image_fixture());
    }
}
