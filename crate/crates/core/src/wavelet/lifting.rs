//! One step of the non-periodic 5/3 lifting transform on a signal of length
//! `2^j + 1`.
//!
//! Predict: `d[k] = s[2k+1] - (s[2k] + s[2k+2]) / 2`.
//! Update:  `c[k] = s[2k] + a(k-1) d[k-1] + a(k) d[k]` for interior `k`, with
//! `a = 1/2` on the first and last detail and `1/4` elsewhere. The two end
//! samples are copied unchanged.

use super::WaveletError;

/// Returns `j` when `len == 2^j + 1`.
pub fn dyadic_exponent(len: usize) -> Option<u32> {
    if len < 2 {
        return None;
    }
    let m = len - 1;
    m.is_power_of_two().then(|| m.trailing_zeros())
}

#[inline]
fn update_weight(k: usize, details: usize) -> f64 {
    if k == 0 || k + 1 == details {
        0.5
    } else {
        0.25
    }
}

#[inline]
fn lift(k: usize, details: &[f64]) -> f64 {
    let m = details.len();
    update_weight(k - 1, m) * details[k - 1] + update_weight(k, m) * details[k]
}

fn check_transformable(len: usize) -> Result<(), WaveletError> {
    match dyadic_exponent(len) {
        Some(j) if j >= 1 => Ok(()),
        _ => Err(WaveletError::InvalidLength(len)),
    }
}

/// Splits `s` into coarse samples (`2^(j-1) + 1`) and details (`2^(j-1)`).
pub fn dwt_step_1d(s: &[f64]) -> Result<(Vec<f64>, Vec<f64>), WaveletError> {
    check_transformable(s.len())?;
    let mut line = s.to_vec();
    let mut scratch = Vec::with_capacity(s.len());
    forward_in_place(&mut line, &mut scratch);
    let details = line.split_off(s.len() / 2 + 1);
    Ok((line, details))
}

/// Inverse of [`dwt_step_1d`].
pub fn idwt_step_1d(coarse: &[f64], details: &[f64]) -> Result<Vec<f64>, WaveletError> {
    if coarse.len() != details.len() + 1 {
        return Err(WaveletError::LengthMismatch {
            coarse: coarse.len(),
            details: details.len(),
        });
    }
    let mut line = Vec::with_capacity(coarse.len() + details.len());
    line.extend_from_slice(coarse);
    line.extend_from_slice(details);
    check_transformable(line.len())?;
    let mut scratch = Vec::with_capacity(line.len());
    inverse_in_place(&mut line, &mut scratch);
    Ok(line)
}

/// Rewrites `line` (length `2^j + 1`, `j >= 1`) as `[coarse | details]`.
pub(crate) fn forward_in_place(line: &mut [f64], scratch: &mut Vec<f64>) {
    let n = line.len();
    let m = (n - 1) / 2;
    scratch.clear();
    scratch.extend_from_slice(line);
    let s = &scratch[..];

    let (coarse, details) = line.split_at_mut(m + 1);
    for k in 0..m {
        details[k] = s[2 * k + 1] - 0.5 * (s[2 * k] + s[2 * k + 2]);
    }
    coarse[0] = s[0];
    coarse[m] = s[2 * m];
    for k in 1..m {
        coarse[k] = s[2 * k] + lift(k, details);
    }
}

/// Inverse of [`forward_in_place`].
pub(crate) fn inverse_in_place(line: &mut [f64], scratch: &mut Vec<f64>) {
    let n = line.len();
    let m = (n - 1) / 2;
    scratch.clear();
    scratch.extend_from_slice(line);
    let (coarse, details) = scratch.split_at_mut(m + 1);

    for k in 1..m {
        coarse[k] -= lift(k, details);
    }
    for k in 0..=m {
        line[2 * k] = coarse[k];
    }
    for k in 0..m {
        line[2 * k + 1] = details[k] + 0.5 * (coarse[k] + coarse[k + 1]);
    }
}

/// Applies `levels` forward steps to the shrinking prefix of `line`, leaving
/// `[samples | coarsest details | ... | finest details]`.
pub(crate) fn forward_multilevel(line: &mut [f64], levels: u32, scratch: &mut Vec<f64>) {
    let mut n = line.len();
    for _ in 0..levels {
        forward_in_place(&mut line[..n], scratch);
        n = (n - 1) / 2 + 1;
    }
}

pub(crate) fn inverse_multilevel(line: &mut [f64], levels: u32, scratch: &mut Vec<f64>) {
    let n = line.len();
    for level in (0..levels).rev() {
        let len = ((n - 1) >> level) + 1;
        inverse_in_place(&mut line[..len], scratch);
    }
}
