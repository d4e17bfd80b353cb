//! Lossless back-ends for thresholded coefficients, plus the `WGC1`
//! container that carries one compressed patch.
//!
//! Container layout (little-endian):
//!
//! ```text
//! "WGC1" | codec id u32 | ndims u32 | dims u32[ndims] | components u32 | levels u32 | payload
//! csr payload: per component, 3 arrays (V f64, COL u32, ROW u32), each prefixed by a u64 count
//! lz payload:  chunk_size u32 | n_chunks u64 | (raw_len u32, enc_len u32, bytes)*
//! ```

mod csr;
mod lz;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use csr::{csr_decode, csr_encode, csr_encode_nd, csr_view, is_stored_zero, CsrBlock};
pub use lz::{lz_decode, lz_encode, LzChunk, LzStream, CHUNK_1M, CHUNK_256K, CHUNK_64K, FRAME_OVERHEAD};

pub const MAGIC: &[u8; 4] = b"WGC1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{0} entries overflow 32-bit indices")]
    IndexOverflow(usize),
    #[error("invalid chunk size {0}")]
    ChunkSize(usize),
    #[error("unknown codec `{0}`")]
    UnknownCodec(String),
    #[error("corrupt data: {0}")]
    Corrupt(String),
    #[error("truncated input: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Codec {
    #[default]
    Csr,
    Lz { chunk_size: usize },
}

impl Codec {
    pub fn id(&self) -> u32 {
        match self {
            Codec::Csr => 1,
            Codec::Lz { .. } => 2,
        }
    }
}


/// Accepts `csr`, `lz` (64 KiB chunks) and `lz:<bytes>`.
impl FromStr for Codec {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.split_once(':') {
            None if s == "csr" => Ok(Codec::Csr),
            None if s == "lz" || s == "lz4" => Ok(Codec::Lz { chunk_size: CHUNK_64K }),
            Some(("lz" | "lz4", size)) => {
                let chunk_size = size.parse().map_err(|_| CodecError::UnknownCodec(s.clone()))?;
                if chunk_size == 0 || chunk_size > u32::MAX as usize {
                    return Err(CodecError::ChunkSize(chunk_size));
                }
                Ok(Codec::Lz { chunk_size })
            }
            _ => Err(CodecError::UnknownCodec(s)),
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Codec::Csr => f.write_str("csr"),
            Codec::Lz { chunk_size } => write!(f, "lz:{chunk_size}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Csr(Vec<CsrBlock>),
    Lz(LzStream),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedPatch {
    dims: Vec<usize>,
    components: usize,
    levels: u32,
    payload: Payload,
}

impl CompressedPatch {
    /// Encodes `components` equally shaped coefficient arrays.
    pub fn encode(codec: Codec, dims: &[usize], levels: u32, components: &[&[f64]]) -> Result<Self, CodecError> {
        let count: usize = dims.iter().product();
        if dims.is_empty() || count == 0 || components.is_empty() {
            return Err(CodecError::EmptyMatrix);
        }
        if let Some(bad) = components.iter().find(|c| c.len() != count) {
            return Err(CodecError::ShapeMismatch {
                expected: count,
                got: bad.len(),
            });
        }
        let payload = match codec {
            Codec::Csr => Payload::Csr(
                components
                    .iter()
                    .map(|c| csr_encode_nd(dims, c))
                    .collect::<Result<_, _>>()?,
            ),
            Codec::Lz { chunk_size } => {
                let mut bytes = Vec::with_capacity(8 * count * components.len());
                for c in components {
                    for v in c.iter() {
                        bytes.extend_from_slice(&v.to_le_bytes());
                    }
                }
                Payload::Lz(lz_encode(&bytes, chunk_size)?)
            }
        };
        Ok(Self {
            dims: dims.to_vec(),
            components: components.len(),
            levels,
            payload,
        })
    }

    pub fn decode(&self) -> Result<Vec<Vec<f64>>, CodecError> {
        let count = self.coefficient_count();
        match &self.payload {
            Payload::Csr(blocks) => blocks
                .iter()
                .map(|b| {
                    if (b.rows, b.cols) != csr_view(&self.dims) {
                        return Err(CodecError::Corrupt("csr block shape differs from patch dims".into()));
                    }
                    csr_decode(b)
                })
                .collect(),
            Payload::Lz(stream) => {
                let bytes = lz_decode(stream)?;
                if bytes.len() != 8 * count * self.components {
                    return Err(CodecError::ShapeMismatch {
                        expected: 8 * count * self.components,
                        got: bytes.len(),
                    });
                }
                Ok(bytes
                    .chunks_exact(8 * count)
                    .map(|comp| {
                        comp.chunks_exact(8)
                            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                            .collect()
                    })
                    .collect())
            }
        }
    }

    pub fn codec(&self) -> Codec {
        match &self.payload {
            Payload::Csr(_) => Codec::Csr,
            Payload::Lz(s) => Codec::Lz {
                chunk_size: s.chunk_size,
            },
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn coefficient_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// `8 * coefficients * components`.
    pub fn dense_bytes(&self) -> usize {
        8 * self.coefficient_count() * self.components
    }

    pub fn compressed_bytes(&self) -> usize {
        compressed_size(self)
    }

    /// Stored nonzeros; only CSR tracks them.
    pub fn nnz(&self) -> Option<usize> {
        match &self.payload {
            Payload::Csr(blocks) => Some(blocks.iter().map(CsrBlock::nnz).sum()),
            Payload::Lz(_) => None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.compressed_bytes());
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, self.codec().id());
        put_u32(&mut out, self.dims.len() as u32);
        for &d in &self.dims {
            put_u32(&mut out, d as u32);
        }
        put_u32(&mut out, self.components as u32);
        put_u32(&mut out, self.levels);
        match &self.payload {
            Payload::Csr(blocks) => {
                for b in blocks {
                    put_u64(&mut out, b.values.len() as u64);
                    for v in &b.values {
                        out.extend_from_slice(&v.to_le_bytes());
                    }
                    put_u64(&mut out, b.col_idx.len() as u64);
                    for &c in &b.col_idx {
                        put_u32(&mut out, c);
                    }
                    put_u64(&mut out, b.row_ptr.len() as u64);
                    for &r in &b.row_ptr {
                        put_u32(&mut out, r);
                    }
                }
            }
            Payload::Lz(s) => {
                put_u32(&mut out, s.chunk_size as u32);
                put_u64(&mut out, s.chunks.len() as u64);
                for c in &s.chunks {
                    put_u32(&mut out, c.raw_len);
                    put_u32(&mut out, c.enc_len());
                    out.extend_from_slice(&c.payload);
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(CodecError::Corrupt("missing WGC1 magic".into()));
        }
        let id = r.u32()?;
        let ndims = r.u32()? as usize;
        if ndims == 0 || ndims > 16 {
            return Err(CodecError::Corrupt(format!("unsupported rank {ndims}")));
        }
        let dims = (0..ndims).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let components = r.u32()? as usize;
        let levels = r.u32()?;
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&c| c > 0)
            .ok_or_else(|| CodecError::Corrupt(format!("bad dims {dims:?}")))?;
        if components == 0 {
            return Err(CodecError::Corrupt("zero components".into()));
        }
        let payload = match id {
            1 => {
                let (rows, cols) = csr_view(&dims);
                let mut blocks = Vec::with_capacity(components.min(64));
                for _ in 0..components {
                    let nv = r.count(8)?;
                    let values = (0..nv).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
                    let nc = r.count(4)?;
                    let col_idx = (0..nc).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
                    let nr = r.count(4)?;
                    let row_ptr = (0..nr).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
                    let block = CsrBlock {
                        rows,
                        cols,
                        values,
                        col_idx,
                        row_ptr,
                    };
                    block.validate()?;
                    blocks.push(block);
                }
                Payload::Csr(blocks)
            }
            2 => {
                let chunk_size = r.u32()? as usize;
                let n = r.count(8)?;
                let mut chunks = Vec::with_capacity(n);
                for _ in 0..n {
                    let raw_len = r.u32()?;
                    let enc_len = r.u32()? as usize;
                    let payload = r.take(enc_len)?.to_vec();
                    chunks.push(LzChunk { raw_len, payload });
                }
                let stream = LzStream { chunk_size, chunks };
                if stream.raw_len() != 8 * count * components {
                    return Err(CodecError::Corrupt("lz raw length does not match shape".into()));
                }
                Payload::Lz(stream)
            }
            other => return Err(CodecError::UnknownCodec(format!("id {other}"))),
        };
        if r.pos != bytes.len() {
            return Err(CodecError::Corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self {
            dims,
            components,
            levels,
            payload,
        })
    }
}

/// CSR: `8 |V| + 4 |COL| + 4 |ROW|` per component. LZ: `sum(8 + enc_len)`.
pub fn compressed_size(p: &CompressedPatch) -> usize {
    match &p.payload {
        Payload::Csr(blocks) => blocks.iter().map(CsrBlock::byte_size).sum(),
        Payload::Lz(s) => s.byte_size(),
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let left = self.bytes.len() - self.pos;
        if n > left {
            return Err(CodecError::Truncated {
                offset: self.pos,
                needed: n - left,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Reads a u64 element count and checks that `count * width` bytes remain.
    fn count(&mut self, width: usize) -> Result<usize, CodecError> {
        let n = self.u64()?;
        let left = (self.bytes.len() - self.pos) as u64;
        if n.saturating_mul(width as u64) > left {
            return Err(CodecError::Truncated {
                offset: self.pos,
                needed: (n.saturating_mul(width as u64) - left).min(usize::MAX as u64) as usize,
            });
        }
        Ok(n as usize)
    }
}
