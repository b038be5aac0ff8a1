//! IDX image/label files (the MNIST container format).
//!
//! Layout: a big-endian `u32` magic (`0x00000803` for `u8` images of rank 3,
//! `0x00000801` for `u8` labels of rank 1), one big-endian `u32` per
//! dimension, then the raw bytes in row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn len(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols).max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[i * size..(i + 1) * size]
    }
}

fn header(bytes: &[u8], magic: u32, rank: usize) -> Result<Vec<usize>> {
    let need = 4 * (rank + 1);
    if bytes.len() < need {
        return Err(Error::Idx(format!("truncated header: {} bytes", bytes.len())));
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if word(0) != magic {
        return Err(Error::Idx(format!("bad magic {:#010x}, expected {magic:#010x}", word(0))));
    }
    Ok((1..=rank).map(|i| word(i) as usize).collect())
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages> {
    let dims = header(bytes, IMAGES_MAGIC, 3)?;
    let (n, rows, cols) = (dims[0], dims[1], dims[2]);
    let body = &bytes[16..];
    if body.len() != n * rows * cols {
        return Err(Error::Idx(format!(
            "expected {} pixel bytes, found {}",
            n * rows * cols,
            body.len()
        )));
    }
    Ok(IdxImages { rows, cols, pixels: body.to_vec() })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let n = header(bytes, LABELS_MAGIC, 1)?[0];
    let body = &bytes[8..];
    if body.len() != n {
        return Err(Error::Idx(format!("expected {n} label bytes, found {}", body.len())));
    }
    Ok(body.to_vec())
}

pub fn read_images(path: &Path) -> Result<IdxImages> {
    let bytes = fs::read(path).map_err(|e| Error::Idx(format!("{}: {e}", path.display())))?;
    parse_images(&bytes)
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::Idx(format!("{}: {e}", path.display())))?;
    parse_labels(&bytes)
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for word in [IMAGES_MAGIC, images.len() as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
