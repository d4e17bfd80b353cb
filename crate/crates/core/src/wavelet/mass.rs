//! Trapezoidal mass, the quantity every lifting step halves exactly.

use crate::field::next_index;

/// `(s[0] + s[last]) / 2 + sum(interior)`.
pub fn trapezoid_mass(s: &[f64]) -> f64 {
    match s.len() {
        0 => 0.0,
        1 => s[0],
        n => 0.5 * (s[0] + s[n - 1]) + s[1..n - 1].iter().sum::<f64>(),
    }
}

/// Tensor-product trapezoid weight along one axis of length `n`.
#[inline]
fn edge_weight(i: usize, n: usize) -> f64 {
    if n > 1 && (i == 0 || i + 1 == n) {
        0.5
    } else {
        1.0
    }
}

/// N-D trapezoid mass of a row-major block: half weight on every boundary
/// face, so corners get `2^-N`.
pub fn trapezoid_mass_nd(dims: &[usize], data: &[f64]) -> f64 {
    debug_assert_eq!(dims.iter().product::<usize>(), data.len());
    let mut idx = vec![0; dims.len()];
    let mut total = 0.0;
    let mut flat = 0;
    loop {
        let w: f64 = idx.iter().zip(dims).map(|(&i, &n)| edge_weight(i, n)).product();
        total += w * data[flat];
        flat += 1;
        if !next_index(&mut idx, dims) {
            break;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_masses() {
        assert_eq!(trapezoid_mass(&[0.0, 1.0, 2.0, 3.0, 4.0]), 8.0);
        assert_eq!(trapezoid_mass(&[0.0, 2.0, 4.0]), 4.0);
    }

    #[test]
    fn constant_block_weights() {
        let data = vec![1.0; 5 * 9];
        assert_eq!(trapezoid_mass_nd(&[5, 9], &data), 4.0 * 8.0);
        assert_eq!(trapezoid_mass_nd(&[9], &data[..9]), trapezoid_mass(&data[..9]));
    }
}
