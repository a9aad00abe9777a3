//! On-disk formats: the TSR1 tensor container and 16-bit binary PGM.
//!
//! TSR1 layout: `b"TSR1"`, then height, width, channels as little-endian
//! `u32`, then `height * width * channels` little-endian `f32` values in
//! row-major, channel-fastest order. Nothing follows the payload.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::feature::{min_max, DepthMap, FeatureMap};
use crate::real::Real;

pub const TSR1_MAGIC: &[u8; 4] = b"TSR1";
pub const TSR1_HEADER_LEN: usize = 16;

pub fn encode_tensor<T: Real>(map: &FeatureMap<T>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(TSR1_HEADER_LEN + 4 * map.data().len());
    out.extend_from_slice(TSR1_MAGIC);
    for dim in [map.height(), map.width(), map.channels()] {
        let dim = u32::try_from(dim).map_err(|_| Error::Dimension(format!("dimension {dim} exceeds u32")))?;
        out.extend_from_slice(&dim.to_le_bytes());
    }
    for (i, v) in map.data().iter().enumerate() {
        let f = v.to_f32().unwrap_or(f32::NAN);
        if !f.is_finite() {
            return Err(Error::Data(format!("value at offset {i} does not fit in f32")));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tensor<T: Real>(bytes: &[u8]) -> Result<FeatureMap<T>> {
    if bytes.len() < TSR1_HEADER_LEN {
        return Err(Error::Format(format!("file too short for header: {} bytes", bytes.len())));
    }
    if &bytes[..4] != TSR1_MAGIC {
        return Err(Error::Format("bad magic, expected TSR1".into()));
    }
    let dim = |k: usize| {
        let at = 4 + 4 * k;
        u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
    };
    let (height, width, channels) = (dim(0), dim(1), dim(2));
    if height == 0 || width == 0 || channels == 0 {
        return Err(Error::Format(format!("zero dimension in header: {height}x{width}x{channels}")));
    }
    let count = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Format("declared size overflows".into()))?;
    let payload = &bytes[TSR1_HEADER_LEN..];
    if payload.len() != count * 4 {
        return Err(Error::Format(format!("declared {count} values but payload holds {} bytes", payload.len())));
    }
    let mut data = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Data(format!("non-finite value at offset {i}")));
        }
        data.push(T::lit(v as f64));
    }
    FeatureMap::new(height, width, channels, data)
}

pub fn load_tensor<T: Real>(path: impl AsRef<Path>) -> Result<FeatureMap<T>> {
    decode_tensor(&fs::read(path)?)
}

pub fn save_tensor<T: Real>(map: &FeatureMap<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_tensor(map)?)?;
    Ok(())
}

/// Binary P5 image with maxval 65535 and big-endian samples. Values are
/// min-max normalised onto `[0, 65535]`; a constant map encodes as zeros.
pub fn encode_pgm<T: Real>(depth: &DepthMap<T>) -> Vec<u8> {
    let header = format!("P5 {} {} 65535\n", depth.width(), depth.height());
    let mut out = Vec::with_capacity(header.len() + 2 * depth.len());
    out.extend_from_slice(header.as_bytes());
    let (lo, hi) = min_max(depth.data());
    let span = (hi - lo).to_f64_lossy();
    for v in depth.data() {
        let px = if span > 0.0 {
            let t = (v.to_f64_lossy() - lo.to_f64_lossy()) / span;
            (t * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        out.extend_from_slice(&px.to_be_bytes());
    }
    out
}

pub fn save_pgm<T: Real>(depth: &DepthMap<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(depth))?;
    Ok(())
}

/// Parses a binary P5 image (8- or 16-bit) into raw sample values.
pub fn decode_pgm<T: Real>(bytes: &[u8]) -> Result<DepthMap<T>> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // whitespace and comments between header tokens
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
    }
    if fields[0] != "P5" {
        return Err(Error::Format(format!("unsupported PGM magic {:?}", fields[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad PGM header field {s:?}")));
    let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("bad PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let sample = if maxval < 256 { 1 } else { 2 };
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() != width * height * sample {
        return Err(Error::Format(format!(
            "PGM raster holds {} bytes, expected {}",
            raster.len(),
            width * height * sample
        )));
    }
    let data = if sample == 1 {
        raster.iter().map(|&b| T::lit(b as f64)).collect()
    } else {
        raster.chunks_exact(2).map(|c| T::lit(u16::from_be_bytes([c[0], c[1]]) as f64)).collect()
    };
    DepthMap::new(height, width, data)
}

pub fn load_pgm<T: Real>(path: impl AsRef<Path>) -> Result<DepthMap<T>> {
    decode_pgm(&fs::read(path)?)
}

/// Loads a depth map from either container, sniffing the magic bytes.
pub fn load_depth<T: Real>(path: impl AsRef<Path>) -> Result<DepthMap<T>> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(TSR1_MAGIC) {
        DepthMap::try_from(decode_tensor::<T>(&bytes)?)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else {
        Err(Error::Format("expected a TSR1 or P5 file".into()))
    }
}
