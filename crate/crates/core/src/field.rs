//! Dense N-dimensional arrays of doubles in row-major order (last axis
//! fastest).

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("field shape {dims:?} needs {expected} values, got {got}")]
    ShapeMismatch {
        dims: Vec<usize>,
        expected: usize,
        got: usize,
    },
    #[error("field must have at least one dimension and no zero-length axis, got {0:?}")]
    EmptyShape(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(dims: &[usize]) -> Result<Self, FieldError> {
        Self::filled(dims, 0.0)
    }

    pub fn filled(dims: &[usize], value: f64) -> Result<Self, FieldError> {
        let len = checked_len(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![value; len],
        })
    }

    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Result<Self, FieldError> {
        let expected = checked_len(dims)?;
        if expected != data.len() {
            return Err(FieldError::ShapeMismatch {
                dims: dims.to_vec(),
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    /// Builds a field by evaluating `f` at every multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self, FieldError> {
        let len = checked_len(dims)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; dims.len()];
        loop {
            data.push(f(&idx));
            if !next_index(&mut idx, dims) {
                break;
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        for (i, (&k, &n)) in idx.iter().zip(&self.dims).enumerate() {
            debug_assert!(k < n, "index {k} out of bounds on axis {i}");
            off = off * n + k;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    /// Copy of the low-corner block with extents `dims`.
    pub fn crop(&self, dims: &[usize]) -> Result<Field, FieldError> {
        if dims.len() != self.dims.len() || dims.iter().zip(&self.dims).any(|(a, b)| a > b) {
            return Err(FieldError::ShapeMismatch {
                dims: dims.to_vec(),
                expected: dims.iter().product(),
                got: self.data.len(),
            });
        }
        Field::from_fn(dims, |i| self.get(i))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

fn checked_len(dims: &[usize]) -> Result<usize, FieldError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(FieldError::EmptyShape(dims.to_vec()));
    }
    Ok(dims.iter().product())
}

/// Row-major strides for `dims`.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Advances `idx` through the box `dims` in row-major order. Returns `false`
/// once the last index has been passed (and leaves `idx` zeroed).
pub fn next_index(idx: &mut [usize], dims: &[usize]) -> bool {
    for axis in (0..idx.len()).rev() {
        idx[axis] += 1;
        if idx[axis] < dims[axis] {
            return true;
        }
        idx[axis] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_offsets() {
        let f = Field::from_fn(&[2, 3, 4], |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64).unwrap();
        assert_eq!(f.strides(), vec![12, 4, 1]);
        assert_eq!(f.get(&[1, 2, 3]), 123.0);
        assert_eq!(f.data()[f.offset(&[1, 0, 2])], 102.0);
    }

    #[test]
    fn crop_low_corner() {
        let f = Field::from_fn(&[3, 4], |i| (i[0] * 10 + i[1]) as f64).unwrap();
        let c = f.crop(&[2, 2]).unwrap();
        assert_eq!(c.data(), &[0.0, 1.0, 10.0, 11.0]);
        assert!(f.crop(&[4, 1]).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            Field::from_vec(&[2, 2], vec![0.0; 3]),
            Err(FieldError::ShapeMismatch { expected: 4, got: 3, .. })
        ));
        assert!(Field::zeros(&[]).is_err());
        assert!(Field::zeros(&[3, 0]).is_err());
    }

    #[test]
    fn index_walk_visits_every_cell_once() {
        let dims = [3, 2, 2];
        let mut idx = vec![0; 3];
        let mut n = 1;
        while next_index(&mut idx, &dims) {
            n += 1;
        }
        assert_eq!(n, 12);
        assert_eq!(idx, vec![0, 0, 0]);
    }
}
