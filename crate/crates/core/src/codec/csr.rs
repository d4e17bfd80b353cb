//! Compressed sparse row storage for mostly-zero coefficient arrays.
//!
//! A value counts as zero only when its bit pattern is `+0.0`, so `-0.0`
//! is kept as an entry and every input round-trips bit for bit.

use super::CodecError;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrBlock {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub col_idx: Vec<u32>,
    pub row_ptr: Vec<u32>,
}

#[inline]
pub fn is_stored_zero(v: f64) -> bool {
    v.to_bits() == 0
}

/// `rows x cols` view of an N-D array: leading axes flattened into rows.
pub fn csr_view(dims: &[usize]) -> (usize, usize) {
    match dims.split_last() {
        Some((&cols, lead)) => (lead.iter().product(), cols),
        None => (0, 0),
    }
}

pub fn csr_encode(data: &[f64], rows: usize, cols: usize) -> Result<CsrBlock, CodecError> {
    if rows == 0 || cols == 0 {
        return Err(CodecError::EmptyMatrix);
    }
    if rows.checked_mul(cols) != Some(data.len()) {
        return Err(CodecError::ShapeMismatch {
            expected: rows.saturating_mul(cols),
            got: data.len(),
        });
    }
    if cols > u32::MAX as usize || data.len() > u32::MAX as usize {
        return Err(CodecError::IndexOverflow(data.len()));
    }
    let mut block = CsrBlock {
        rows,
        cols,
        values: Vec::new(),
        col_idx: Vec::new(),
        row_ptr: Vec::with_capacity(rows + 1),
    };
    block.row_ptr.push(0);
    for row in data.chunks_exact(cols) {
        for (c, &v) in row.iter().enumerate() {
            if !is_stored_zero(v) {
                block.values.push(v);
                block.col_idx.push(c as u32);
            }
        }
        block.row_ptr.push(block.values.len() as u32);
    }
    Ok(block)
}

pub fn csr_encode_nd(dims: &[usize], data: &[f64]) -> Result<CsrBlock, CodecError> {
    let (rows, cols) = csr_view(dims);
    csr_encode(data, rows, cols)
}

pub fn csr_decode(block: &CsrBlock) -> Result<Vec<f64>, CodecError> {
    block.validate()?;
    let mut out = vec![0.0; block.rows * block.cols];
    for r in 0..block.rows {
        let (lo, hi) = (block.row_ptr[r] as usize, block.row_ptr[r + 1] as usize);
        for k in lo..hi {
            out[r * block.cols + block.col_idx[k] as usize] = block.values[k];
        }
    }
    Ok(out)
}

impl CsrBlock {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `8 * |V| + 4 * |COL| + 4 * |ROW|`.
    pub fn byte_size(&self) -> usize {
        8 * self.values.len() + 4 * self.col_idx.len() + 4 * self.row_ptr.len()
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let corrupt = |what: &str| Err(CodecError::Corrupt(format!("csr: {what}")));
        if self.rows == 0 || self.cols == 0 {
            return corrupt("empty shape");
        }
        if self.row_ptr.len() != self.rows + 1 {
            return corrupt("row offset count does not match rows");
        }
        if self.values.len() != self.col_idx.len() {
            return corrupt("value and column counts differ");
        }
        if self.row_ptr[0] != 0 || *self.row_ptr.last().unwrap() as usize != self.values.len() {
            return corrupt("row offsets do not span the values");
        }
        for r in 0..self.rows {
            let (lo, hi) = (self.row_ptr[r] as usize, self.row_ptr[r + 1] as usize);
            if lo > hi {
                return corrupt("row offsets decrease");
            }
            let cols = &self.col_idx[lo..hi];
            if cols.iter().any(|&c| c as usize >= self.cols) {
                return corrupt("column index out of range");
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return corrupt("columns not strictly increasing within a row");
            }
        }
        Ok(())
    }
}
