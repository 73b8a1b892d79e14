//! Binary Netpbm: P6 color images and P5 label maps.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{LabelMap, RgbImage};

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8], magic: &[u8; 2]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(Error::format(format!("wrong magic: expected {}", String::from_utf8_lossy(magic))));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format("malformed netpbm header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("netpbm header value out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format("malformed netpbm header")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::format("netpbm image has zero extent"));
    }
    Ok(Header { width: width as usize, height: height as usize, maxval, data_start: pos })
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let h = parse_header(bytes, b"P6")?;
    if h.maxval != 255 {
        return Err(Error::format(format!("unsupported PPM maxval {} (only 255)", h.maxval)));
    }
    let n = h.width * h.height * 3;
    let payload = &bytes[h.data_start..];
    if payload.len() < n {
        return Err(Error::format(format!("truncated PPM payload: {} of {n} bytes", payload.len())));
    }
    RgbImage::new(h.width, h.height, payload[..n].to_vec())
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    decode_ppm(&fs::read(path).map_err(Error::at_path(path))?)
}

pub fn write_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(img)).map_err(Error::at_path(path))?;
    Ok(())
}

/// Decodes a P5 file. Maxval 255 means one byte per sample, 65535 two
/// big-endian bytes.
pub fn decode_pgm(bytes: &[u8]) -> Result<LabelMap> {
    let h = parse_header(bytes, b"P5")?;
    let sample = match h.maxval {
        255 => 1,
        65535 => 2,
        m => return Err(Error::format(format!("unsupported PGM maxval {m} (255 or 65535)"))),
    };
    let n = h.width * h.height;
    let payload = &bytes[h.data_start..];
    if payload.len() < n * sample {
        return Err(Error::format(format!("truncated PGM payload: {} of {} bytes", payload.len(), n * sample)));
    }
    let data = if sample == 1 {
        payload[..n].iter().map(|&b| b as u16).collect()
    } else {
        payload[..2 * n].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    };
    LabelMap::new(h.width, h.height, data)
}

/// Encodes with the smallest maxval (255 or 65535) that holds every label.
pub fn encode_pgm(map: &LabelMap) -> Vec<u8> {
    let max = map.data().iter().copied().max().unwrap_or(0);
    let maxval = if max <= 255 { 255 } else { 65535 };
    encode_pgm_with_maxval(map, maxval).expect("maxval covers every label")
}

pub fn encode_pgm_with_maxval(map: &LabelMap, maxval: u16) -> Result<Vec<u8>> {
    if let Some(v) = map.data().iter().find(|&&v| v > maxval) {
        return Err(Error::invalid(format!("label {v} exceeds maxval {maxval}")));
    }
    let mut out = format!("P5\n{} {}\n{}\n", map.width(), map.height(), maxval).into_bytes();
    if maxval <= 255 {
        out.extend(map.data().iter().map(|&v| v as u8));
    } else {
        map.data().iter().for_each(|v| out.extend_from_slice(&v.to_be_bytes()));
    }
    Ok(out)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    decode_pgm(&fs::read(path).map_err(Error::at_path(path))?)
}

pub fn write_pgm(map: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(map)).map_err(Error::at_path(path))?;
    Ok(())
}
