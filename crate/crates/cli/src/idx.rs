//! IDX image and label files (the MNIST distribution format).

use std::fs;
use std::path::{Path, PathBuf};

use sac_core::Dataset;

use crate::error::CliError;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Side of the downsampled images fed to the 256-input network.
pub const RESIZED_SIDE: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Images {
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels, one vector per image.
    pub pixels: Vec<Vec<u8>>,
}

fn data_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {msg}", path.display()))
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// Checks the magic number and the declared count, returning the payload.
fn payload<'a>(path: &Path, bytes: &'a [u8], magic: u32, header: usize) -> Result<(&'a [u8], usize), CliError> {
    if bytes.len() < header {
        return Err(data_err(path, format!("truncated header ({} bytes)", bytes.len())));
    }
    let m = be_u32(bytes, 0);
    if m != magic {
        return Err(data_err(path, format!("bad magic {m:#010x}, expected {magic:#010x}")));
    }
    Ok((&bytes[header..], be_u32(bytes, 4) as usize))
}

pub fn parse_images(path: &Path, bytes: &[u8]) -> Result<Images, CliError> {
    let (body, count) = payload(path, bytes, IMAGE_MAGIC, 16)?;
    let (rows, cols) = (be_u32(bytes, 8) as usize, be_u32(bytes, 12) as usize);
    if rows == 0 || cols == 0 {
        return Err(data_err(path, "zero image dimension"));
    }
    let size = rows * cols;
    if body.len() != count * size {
        return Err(data_err(
            path,
            format!("header declares {count} images of {rows}x{cols} but payload has {} bytes", body.len()),
        ));
    }
    Ok(Images { rows, cols, pixels: body.chunks_exact(size).map(<[u8]>::to_vec).collect() })
}

pub fn parse_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>, CliError> {
    let (body, count) = payload(path, bytes, LABEL_MAGIC, 8)?;
    if body.len() != count {
        return Err(data_err(path, format!("header declares {count} labels but payload has {}", body.len())));
    }
    if let Some(i) = body.iter().position(|&l| l > 9) {
        return Err(data_err(path, format!("label {} at index {i} is not a digit", body[i])));
    }
    Ok(body.to_vec())
}

pub fn read_images(path: &Path) -> Result<Images, CliError> {
    parse_images(path, &read(path)?)
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>, CliError> {
    parse_labels(path, &read(path)?)
}

/// Area-average resample of a `rows x cols` image to `side x side`.
pub fn resize(pixels: &[u8], rows: usize, cols: usize, side: usize) -> Vec<f64> {
    let mut out = vec![0.0; side * side];
    for (oy, row) in out.chunks_exact_mut(side).enumerate() {
        let (y0, y1) = (oy as f64 * rows as f64 / side as f64, (oy + 1) as f64 * rows as f64 / side as f64);
        for (ox, v) in row.iter_mut().enumerate() {
            let (x0, x1) = (ox as f64 * cols as f64 / side as f64, (ox + 1) as f64 * cols as f64 / side as f64);
            let mut acc = 0.0;
            for y in y0.floor() as usize..(y1.ceil() as usize).min(rows) {
                let wy = (y1.min(y as f64 + 1.0) - y0.max(y as f64)).max(0.0);
                for x in x0.floor() as usize..(x1.ceil() as usize).min(cols) {
                    let wx = (x1.min(x as f64 + 1.0) - x0.max(x as f64)).max(0.0);
                    acc += wy * wx * f64::from(pixels[y * cols + x]);
                }
            }
            *v = acc / ((y1 - y0) * (x1 - x0));
        }
    }
    out
}

/// Which half of the distribution to load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

pub fn split_paths(dir: &Path, split: Split) -> (PathBuf, PathBuf) {
    let p = split.prefix();
    (dir.join(format!("{p}-images-idx3-ubyte")), dir.join(format!("{p}-labels-idx1-ubyte")))
}

/// Builds a dataset from images and labels, downsampled to `side x side`
/// with pixels mapped onto `[0, c]`.
pub fn to_dataset(images: &Images, labels: &[u8], side: usize, c: f64) -> Result<Dataset, CliError> {
    if images.pixels.len() != labels.len() {
        return Err(CliError::Data(format!("{} images but {} labels", images.pixels.len(), labels.len())));
    }
    let features = images
        .pixels
        .iter()
        .map(|px| {
            let v = if side == images.rows && side == images.cols {
                px.iter().map(|&b| f64::from(b)).collect()
            } else {
                resize(px, images.rows, images.cols, side)
            };
            v.into_iter().map(|p| c * p / 255.0).collect()
        })
        .collect();
    Ok(Dataset::new(features, labels.iter().map(|&l| usize::from(l)).collect(), 10)?)
}

/// Loads one split from `dir` at 16 x 16.
pub fn load_mnist(dir: &Path, split: Split, c: f64) -> Result<Dataset, CliError> {
    let (img, lab) = split_paths(dir, split);
    to_dataset(&read_images(&img)?, &read_labels(&lab)?, RESIZED_SIDE, c)
}
