//! Fixation maps as 16-bit binary PGM.
//!
//! ```text
//! P5
//! # windb-max 0.0421
//! 64 32
//! 65535
//! <64*32 big-endian u16 samples, row 0 = north pole>
//! ```
//!
//! Cell values in `[0, max]` are quantised linearly to `[0, 65535]`. The
//! comment line carries `max` so the scale survives the round trip; files
//! without it read back with `max = 1`.

use std::path::Path;

use crate::analytics::FixationMap;
use crate::io::{io_err, IoFormatError};

const MAXVAL: u32 = 65535;
const SCALE_TAG: &str = "windb-max";

pub fn encode_map(map: &FixationMap) -> Vec<u8> {
    let max = map.max();
    let header = format!(
        "P5\n# {SCALE_TAG} {max}\n{} {}\n{MAXVAL}\n",
        map.width(),
        map.height()
    );
    let mut out = Vec::with_capacity(header.len() + map.values().len() * 2);
    out.extend_from_slice(header.as_bytes());
    for &v in map.values() {
        let q = if max > 0.0 {
            (v / max * f64::from(MAXVAL))
                .round()
                .clamp(0.0, f64::from(MAXVAL)) as u16
        } else {
            0
        };
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    scale: Option<f64>,
}

impl<'a> Header<'a> {
    fn fail<T>(&self, offset: usize, detail: impl Into<String>) -> Result<T, IoFormatError> {
        Err(IoFormatError::Format {
            offset,
            detail: detail.into(),
        })
    }

    /// Skips whitespace and comment lines, picking up the scale comment.
    fn skip_blank(&mut self) -> Result<(), IoFormatError> {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                let start = self.pos;
                let end = self.bytes[start..]
                    .iter()
                    .position(|&c| c == b'\n')
                    .map_or(self.bytes.len(), |i| start + i);
                let text = String::from_utf8_lossy(&self.bytes[start + 1..end]);
                let mut words = text.split_whitespace();
                if words.next() == Some(SCALE_TAG) {
                    let raw = words.next().unwrap_or("");
                    match raw.parse::<f64>() {
                        Ok(v) if v.is_finite() && v >= 0.0 => self.scale = Some(v),
                        _ => return self.fail(start, format!("bad scale '{raw}'")),
                    }
                }
                self.pos = end;
            } else {
                break;
            }
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<(usize, u32), IoFormatError> {
        self.skip_blank()?;
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
        match digits.parse::<u32>() {
            Ok(v) => Ok((start, v)),
            Err(_) => self.fail(start, format!("expected {what}")),
        }
    }
}

pub fn decode_map(bytes: &[u8]) -> Result<FixationMap, IoFormatError> {
    let mut h = Header {
        bytes,
        pos: 0,
        scale: None,
    };
    if !bytes.starts_with(b"P5") {
        return h.fail(0, "magic must be P5");
    }
    h.pos = 2;
    if !bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return h.fail(2, "expected whitespace after magic");
    }
    let (w_at, width) = h.number("width")?;
    let (h_at, height) = h.number("height")?;
    if width == 0 {
        return h.fail(w_at, "zero width");
    }
    if height == 0 {
        return h.fail(h_at, "zero height");
    }
    let (m_at, maxval) = h.number("maxval")?;
    if maxval != MAXVAL {
        return h.fail(m_at, format!("maxval {maxval}, expected {MAXVAL}"));
    }
    if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return h.fail(h.pos, "expected a single whitespace before the raster");
    }
    let data_at = h.pos + 1;
    let n = (width as usize) * (height as usize);
    let data = &bytes[data_at..];
    if data.len() != n * 2 {
        return h.fail(
            data_at + data.len().min(n * 2),
            format!("raster has {} bytes, expected {}", data.len(), n * 2),
        );
    }
    let scale = h.scale.unwrap_or(1.0);
    let values = data
        .chunks_exact(2)
        .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / f64::from(MAXVAL) * scale)
        .collect();
    FixationMap::new(width, height, values).map_err(|e| IoFormatError::Invalid(e.to_string()))
}

pub fn read_map(path: &Path) -> Result<FixationMap, IoFormatError> {
    decode_map(&std::fs::read(path).map_err(io_err(path))?)
}

/// Reads a map and checks it has the expected grid size.
pub fn read_map_sized(path: &Path, width: u32, height: u32) -> Result<FixationMap, IoFormatError> {
    let m = read_map(path)?;
    if m.width() != width || m.height() != height {
        return Err(IoFormatError::Dimension {
            expected_w: width,
            expected_h: height,
            actual_w: m.width(),
            actual_h: m.height(),
        });
    }
    Ok(m)
}

pub fn write_map(map: &FixationMap, path: &Path) -> Result<(), IoFormatError> {
    std::fs::write(path, encode_map(map)).map_err(io_err(path))
}
