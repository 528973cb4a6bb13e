//! EGSP v1 model files.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "EGSP"
//! 4       4           version (u32 LE, = 1)
//! 8       4           n2 (u32 LE)
//! 12      4           m  (u32 LE)
//! 16      4           k  (u32 LE)
//! 20      8·n2        mean
//!         8·k         eigenvalues
//!         8·n2·k      eigenimages, column-major
//!         8·k·m       training weights, column-major
//!         8           threshold
//!         m × (4 + len)  labels: u32 LE byte length, UTF-8 bytes
//!         4           CRC-32 (IEEE) of every preceding byte, u32 LE
//! ```
//!
//! All doubles are little-endian IEEE-754.

use std::io::{Read, Write};

use thiserror::Error;

use crate::linalg::{Matrix, Vector};
use crate::trainer::EigenspaceModel;

pub const MAGIC: [u8; 4] = *b"EGSP";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;
const CRC_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum ModelStoreError {
    #[error("not an EGSP model file (bad magic)")]
    BadMagic,
    #[error("unsupported EGSP version {0} (expected {VERSION})")]
    UnsupportedVersion(u32),
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("model file truncated")]
    Truncated,
    #[error("model too large for the EGSP format: {0}")]
    TooLarge(String),
    #[error("failed to write model: {0}")]
    SinkFailure(#[source] std::io::Error),
    #[error("failed to read model: {0}")]
    SourceFailure(#[source] std::io::Error),
}

pub type Result<T, E = ModelStoreError> = std::result::Result<T, E>;

/// Header fields of an EGSP file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelFileHeader {
    pub magic: [u8; 4],
    pub version: u32,
    pub n2: u32,
    pub m: u32,
    pub k: u32,
}

fn count_u32(what: &str, n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| ModelStoreError::TooLarge(format!("{what} = {n}")))
}

/// Serializes `model` into an EGSP v1 byte buffer.
pub fn encode_model(model: &EigenspaceModel) -> Result<Vec<u8>> {
    let header = ModelFileHeader {
        magic: MAGIC,
        version: VERSION,
        n2: count_u32("n2", model.n2())?,
        m: count_u32("m", model.m())?,
        k: count_u32("k", model.k())?,
    };
    let doubles = model.n2() + model.k() * (1 + model.n2() + model.m()) + 1;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * doubles + CRC_LEN);
    out.extend_from_slice(&header.magic);
    for field in [header.version, header.n2, header.m, header.k] {
        out.extend_from_slice(&field.to_le_bytes());
    }
    let mut put = |xs: &[f64]| xs.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    put(model.mean().as_slice());
    put(model.eigenvalues());
    put(&model.eigenimages().to_column_major());
    put(&model.training_weights().to_column_major());
    put(&[model.threshold()]);
    for label in model.labels() {
        out.extend_from_slice(&count_u32("label length", label.len())?.to_le_bytes());
        out.extend_from_slice(label.as_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Writes `model` to `sink`, returning the number of bytes written.
pub fn save_model<W: Write>(model: &EigenspaceModel, sink: &mut W) -> Result<u64> {
    let bytes = encode_model(model)?;
    sink.write_all(&bytes).map_err(ModelStoreError::SinkFailure)?;
    sink.flush().map_err(ModelStoreError::SinkFailure)?;
    Ok(bytes.len() as u64)
}

pub fn load_model<R: Read>(source: &mut R) -> Result<EigenspaceModel> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes).map_err(ModelStoreError::SourceFailure)?;
    decode_model(&bytes)
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

/// Reads and checks the fixed header without validating the checksum.
pub fn read_header(bytes: &[u8]) -> Result<ModelFileHeader> {
    if bytes.len() < 4 {
        return Err(ModelStoreError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(ModelStoreError::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(ModelStoreError::Truncated);
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(ModelStoreError::UnsupportedVersion(version));
    }
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(ModelStoreError::Truncated);
    }
    Ok(ModelFileHeader { magic: MAGIC, version, n2: u32_at(bytes, 8), m: u32_at(bytes, 12), k: u32_at(bytes, 16) })
}

struct Body<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Body<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| corrupt("payload shorter than the header declares"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn doubles(&mut self, count: usize) -> Result<Vec<f64>> {
        let len = count.checked_mul(8).ok_or_else(|| corrupt("declared sizes overflow"))?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

fn corrupt(msg: impl Into<String>) -> ModelStoreError {
    ModelStoreError::CorruptFile(msg.into())
}

/// Parses an EGSP buffer: magic, version, checksum, layout and every model
/// invariant are checked before a model is returned.
///
/// Only a buffer too short to hold the header and checksum is reported as
/// [`ModelStoreError::Truncated`]; any later damage, including a cut-off
/// payload, fails the checksum and is reported as corrupt.
pub fn decode_model(bytes: &[u8]) -> Result<EigenspaceModel> {
    let header = read_header(bytes)?;
    let (payload, footer) = bytes.split_at(bytes.len() - CRC_LEN);
    let stored = u32::from_le_bytes(footer.try_into().expect("4 bytes"));
    if crc32fast::hash(payload) != stored {
        return Err(corrupt("checksum mismatch"));
    }

    let (n2, m, k) = (header.n2 as usize, header.m as usize, header.k as usize);
    let mut body = Body { bytes: payload, pos: HEADER_LEN };
    let mean = body.doubles(n2)?;
    let eigenvalues = body.doubles(k)?;
    let eigenimages = body.doubles(n2.checked_mul(k).ok_or_else(|| corrupt("declared sizes overflow"))?)?;
    let weights = body.doubles(k.checked_mul(m).ok_or_else(|| corrupt("declared sizes overflow"))?)?;
    let threshold = body.doubles(1)?[0];
    let mut labels = Vec::with_capacity(m.min(payload.len()));
    for _ in 0..m {
        let len = u32::from_le_bytes(body.take(4)?.try_into().expect("4 bytes")) as usize;
        let text = std::str::from_utf8(body.take(len)?).map_err(|_| corrupt("label is not UTF-8"))?;
        labels.push(text.to_owned());
    }
    if body.pos != payload.len() {
        return Err(corrupt("trailing bytes after labels"));
    }

    let invalid = |e: &dyn std::fmt::Display| corrupt(e.to_string());
    let mean = Vector::new(mean).map_err(|e| invalid(&e))?;
    let eigenimages = Matrix::from_column_major(n2, k, &eigenimages).map_err(|e| invalid(&e))?;
    let weights = Matrix::from_column_major(k, m, &weights).map_err(|e| invalid(&e))?;
    EigenspaceModel::from_parts(mean, eigenvalues, eigenimages, labels, weights, threshold).map_err(|e| invalid(&e))
}
