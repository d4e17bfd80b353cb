//! Dense matrix form of one lifting step, used as a test oracle.
//!
//! Coefficient vectors are read in interleaved order
//! `(c0, d0, c1, d1, ..., c_m)` so that `v = A u` lines up with the usual
//! printed form of the transform.

use std::fmt::Write as _;

use super::lifting::{forward_in_place, inverse_in_place};
use super::WaveletError;

pub const MAX_MATRIX_ORDER: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n, "expected {n}x{n} entries");
        Self {
            n,
            data: rows.to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n {
            for c in 0..self.n {
                if c > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.get(r, c));
            }
            out.push('\n');
        }
        out
    }
}

fn check_order(j: u32) -> Result<usize, WaveletError> {
    if !(1..=MAX_MATRIX_ORDER).contains(&j) {
        return Err(WaveletError::MatrixOrder(j));
    }
    Ok((1usize << j) + 1)
}

/// `[c | d]` block layout to interleaved `(c0, d0, c1, ...)`.
pub fn interleave(block: &[f64]) -> Vec<f64> {
    let m = block.len() / 2;
    let mut out = Vec::with_capacity(block.len());
    for k in 0..m {
        out.push(block[k]);
        out.push(block[m + 1 + k]);
    }
    out.push(block[m]);
    out
}

/// Interleaved `(c0, d0, c1, ...)` to `[c | d]` block layout.
pub fn deinterleave(v: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().step_by(2).copied().collect();
    out.extend(v.iter().skip(1).step_by(2));
    out
}

/// Matrix `A` of one forward step on `2^j + 1` samples: column `r` is the
/// transform of the `r`-th canonical basis vector.
pub fn analysis_matrix(j: u32) -> Result<DenseMatrix, WaveletError> {
    let n = check_order(j)?;
    let mut a = DenseMatrix::zeros(n);
    let mut scratch = Vec::with_capacity(n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        forward_in_place(&mut e, &mut scratch);
        for (row, v) in interleave(&e).into_iter().enumerate() {
            a.set(row, col, v);
        }
    }
    Ok(a)
}

/// Matrix of one inverse step, taking interleaved coefficients to samples.
pub fn synthesis_matrix(j: u32) -> Result<DenseMatrix, WaveletError> {
    let n = check_order(j)?;
    let mut s = DenseMatrix::zeros(n);
    let mut scratch = Vec::with_capacity(n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let mut block = deinterleave(&e);
        inverse_in_place(&mut block, &mut scratch);
        for (row, v) in block.into_iter().enumerate() {
            s.set(row, col, v);
        }
    }
    Ok(s)
}
