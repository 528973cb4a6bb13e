//! Netpbm graymap/pixmap codec (P2, P3, P5, P6).
//!
//! Pixmaps are reduced to gray with BT.601 luma weights. Samples wider than
//! one byte (maxval > 255) are big-endian.

use super::{GrayImage, ImageError, Result};

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    PlainGray,
    PlainColor,
    RawGray,
    RawColor,
}

impl Kind {
    fn channels(self) -> usize {
        match self {
            Kind::PlainGray | Kind::RawGray => 1,
            Kind::PlainColor | Kind::RawColor => 3,
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn unsigned(&mut self, what: &str) -> Result<u64> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => ImageError::Format(format!("truncated before {what}")),
                Some(_) => ImageError::Format(format!("expected a number for {what}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| ImageError::Format(format!("{what} out of range")))
    }
}

/// Decodes a PNM graymap or pixmap into a normalized grayscale image.
pub fn read_pnm(bytes: &[u8]) -> Result<GrayImage> {
    let kind = match bytes.get(..2) {
        Some(b"P2") => Kind::PlainGray,
        Some(b"P3") => Kind::PlainColor,
        Some(b"P5") => Kind::RawGray,
        Some(b"P6") => Kind::RawColor,
        _ => return Err(ImageError::Format("bad magic number".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(ImageError::Format("bad magic number".into()));
    }
    let width = cur.unsigned("width")? as usize;
    let height = cur.unsigned("height")? as usize;
    let maxval = cur.unsigned("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::Format(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(ImageError::UnsupportedMaxval(maxval));
    }
    let count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(kind.channels()))
        .ok_or_else(|| ImageError::Format("image dimensions overflow".into()))?;

    let samples: Vec<u64> = match kind {
        Kind::PlainGray | Kind::PlainColor => {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(cur.unsigned("sample")?);
            }
            out
        }
        Kind::RawGray | Kind::RawColor => {
            if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(ImageError::Format("missing whitespace after maxval".into()));
            }
            let raster = &bytes[cur.pos + 1..];
            let width_bytes = if maxval > 255 { 2 } else { 1 };
            let needed = count * width_bytes;
            if raster.len() < needed {
                return Err(ImageError::Format(format!(
                    "truncated raster: need {needed} bytes, have {}",
                    raster.len()
                )));
            }
            if width_bytes == 1 {
                raster[..needed].iter().map(|&b| u64::from(b)).collect()
            } else {
                raster[..needed]
                    .chunks_exact(2)
                    .map(|c| u64::from(u16::from_be_bytes([c[0], c[1]])))
                    .collect()
            }
        }
    };
    if let Some(s) = samples.iter().find(|&&s| s > maxval) {
        return Err(ImageError::Format(format!("sample {s} exceeds maxval {maxval}")));
    }

    let scale = maxval as f64;
    let pixels: Vec<f64> = match kind.channels() {
        1 => samples.iter().map(|&s| s as f64 / scale).collect(),
        _ => samples
            .chunks_exact(3)
            .map(|rgb| {
                let luma = LUMA[0] * rgb[0] as f64 + LUMA[1] * rgb[1] as f64 + LUMA[2] * rgb[2] as f64;
                (luma / scale).clamp(0.0, 1.0)
            })
            .collect(),
    };
    GrayImage::new(width, height, maxval as u16, pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnmEncoding {
    /// P2
    Plain,
    /// P5
    Raw,
}

/// Encodes a graymap at the image's own maxval, rounding each intensity to
/// the nearest sample value.
pub fn write_pnm(img: &GrayImage, encoding: PnmEncoding) -> Vec<u8> {
    let maxval = img.maxval();
    let samples = img
        .pixels()
        .iter()
        .map(|p| (p * maxval as f64).round().clamp(0.0, maxval as f64) as u16);
    let magic = match encoding {
        PnmEncoding::Plain => "P2",
        PnmEncoding::Raw => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", img.width(), img.height()).into_bytes();
    match encoding {
        PnmEncoding::Plain => {
            for (i, s) in samples.enumerate() {
                let sep = if (i + 1) % img.width() == 0 { "\n" } else { " " };
                out.extend_from_slice(format!("{s}{sep}").as_bytes());
            }
        }
        PnmEncoding::Raw if maxval > 255 => samples.for_each(|s| out.extend_from_slice(&s.to_be_bytes())),
        PnmEncoding::Raw => samples.for_each(|s| out.push(s as u8)),
    }
    out
}
