//! Chunked LZ byte codec. Each chunk is an independent LZ4 block; a chunk
//! whose encoding would not shrink is stored raw, marked by
//! `enc_len == raw_len`.

use super::CodecError;

pub const CHUNK_64K: usize = 64 * 1024;
pub const CHUNK_256K: usize = 256 * 1024;
pub const CHUNK_1M: usize = 1024 * 1024;

/// Per-chunk framing: `raw_len: u32` and `enc_len: u32`.
pub const FRAME_OVERHEAD: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LzChunk {
    pub raw_len: u32,
    pub payload: Vec<u8>,
}

impl LzChunk {
    pub fn enc_len(&self) -> u32 {
        self.payload.len() as u32
    }

    pub fn is_raw(&self) -> bool {
        self.payload.len() == self.raw_len as usize
    }

    pub fn decode(&self) -> Result<Vec<u8>, CodecError> {
        let raw_len = self.raw_len as usize;
        if self.is_raw() {
            return Ok(self.payload.clone());
        }
        if self.payload.len() > raw_len {
            return Err(CodecError::Corrupt(format!(
                "lz: chunk payload of {} bytes exceeds raw length {raw_len}",
                self.payload.len()
            )));
        }
        let out = lz4_flex::block::decompress(&self.payload, raw_len)
            .map_err(|e| CodecError::Corrupt(format!("lz: {e}")))?;
        if out.len() != raw_len {
            return Err(CodecError::Corrupt(format!(
                "lz: chunk decoded to {} bytes, expected {raw_len}",
                out.len()
            )));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LzStream {
    pub chunk_size: usize,
    pub chunks: Vec<LzChunk>,
}

impl LzStream {
    pub fn raw_len(&self) -> usize {
        self.chunks.iter().map(|c| c.raw_len as usize).sum()
    }

    /// `sum(8 + enc_len)`.
    pub fn byte_size(&self) -> usize {
        self.chunks.iter().map(|c| FRAME_OVERHEAD + c.payload.len()).sum()
    }
}

fn check_chunk_size(chunk_size: usize) -> Result<(), CodecError> {
    if chunk_size == 0 || chunk_size > u32::MAX as usize {
        return Err(CodecError::ChunkSize(chunk_size));
    }
    Ok(())
}

pub fn lz_encode(data: &[u8], chunk_size: usize) -> Result<LzStream, CodecError> {
    check_chunk_size(chunk_size)?;
    let chunks = data
        .chunks(chunk_size)
        .map(|raw| {
            let enc = lz4_flex::block::compress(raw);
            let payload = if enc.len() < raw.len() { enc } else { raw.to_vec() };
            LzChunk {
                raw_len: raw.len() as u32,
                payload,
            }
        })
        .collect();
    Ok(LzStream { chunk_size, chunks })
}

pub fn lz_decode(stream: &LzStream) -> Result<Vec<u8>, CodecError> {
    check_chunk_size(stream.chunk_size)?;
    let mut out = Vec::with_capacity(stream.raw_len());
    let last = stream.chunks.len().saturating_sub(1);
    for (i, chunk) in stream.chunks.iter().enumerate() {
        let raw = chunk.raw_len as usize;
        if raw > stream.chunk_size || raw == 0 || (i < last && raw != stream.chunk_size) {
            return Err(CodecError::Corrupt(format!(
                "lz: chunk {i} has raw length {raw} with chunk size {}",
                stream.chunk_size
            )));
        }
        out.extend(chunk.decode()?);
    }
    Ok(out)
}
