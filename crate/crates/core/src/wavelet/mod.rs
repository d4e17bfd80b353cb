//! Mass-conserving 5/3 lifting wavelets on grids of `2^k + 1` points per
//! axis.
//!
//! Coefficients are kept in a corner layout: along every axis a transformed
//! line reads `[samples | coarsest details | ... | finest details]`, so the
//! block of pure samples sits at the all-low-index corner.
//!
//! Two separable traversals are available. [`Traversal::Tensor`] (the
//! default) runs every level along axis 0, then every level along axis 1,
//! and so on, which gives each coefficient an independent scale per axis.
//! [`Traversal::Pyramid`] alternates axes inside each level and only recurses
//! on the sample block. Both conserve trapezoidal mass and both reduce to the
//! same thing in 1-D.

mod lifting;
mod mass;
mod matrix;

use thiserror::Error;

use crate::field::{next_index, strides, Field};

pub use lifting::{dwt_step_1d, dyadic_exponent, idwt_step_1d};
pub use mass::{trapezoid_mass, trapezoid_mass_nd};
pub use matrix::{analysis_matrix, deinterleave, interleave, synthesis_matrix, DenseMatrix, MAX_MATRIX_ORDER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WaveletError {
    #[error("signal length {0} is not 2^j + 1 with j >= 1")]
    InvalidLength(usize),
    #[error("{coarse} coarse samples cannot pair with {details} details")]
    LengthMismatch { coarse: usize, details: usize },
    #[error("axis {axis} has length {len}, which is not 2^k + 1")]
    InvalidDimension { axis: usize, len: usize },
    #[error("{levels} levels requested but axis {axis} only supports {max}")]
    TooManyLevels { levels: u32, axis: usize, max: u32 },
    #[error("field dims {field:?} do not match plan dims {plan:?}")]
    PlanMismatch { field: Vec<usize>, plan: Vec<usize> },
    #[error("{got} coefficients do not fill a {expected}-value plan")]
    CoefficientCount { expected: usize, got: usize },
    #[error("matrix order j={0} outside 1..=10")]
    MatrixOrder(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Traversal {
    #[default]
    Tensor,
    Pyramid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletPlan {
    dims: Vec<usize>,
    levels: u32,
    traversal: Traversal,
}

impl WaveletPlan {
    pub fn new(dims: &[usize], levels: u32) -> Result<Self, WaveletError> {
        Self::with_traversal(dims, levels, Traversal::default())
    }

    pub fn with_traversal(dims: &[usize], levels: u32, traversal: Traversal) -> Result<Self, WaveletError> {
        if dims.is_empty() {
            return Err(WaveletError::InvalidDimension { axis: 0, len: 0 });
        }
        for (axis, &len) in dims.iter().enumerate() {
            let k = dyadic_exponent(len).ok_or(WaveletError::InvalidDimension { axis, len })?;
            if levels > k {
                return Err(WaveletError::TooManyLevels { levels, axis, max: k });
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            levels,
            traversal,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn traversal(&self) -> Traversal {
        self.traversal
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Extents of the pure-sample corner block, `2^(k_i - L) + 1` per axis.
    pub fn sample_dims(&self) -> Vec<usize> {
        self.dims.iter().map(|&n| ((n - 1) >> self.levels) + 1).collect()
    }

    /// True when every axis keeps at least 3 samples after the last level.
    pub fn is_mass_conserving(&self) -> bool {
        self.sample_dims().iter().all(|&n| n >= 3) || self.levels == 0
    }
}

/// Per-axis position of a coefficient in the band structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisBand {
    Sample,
    /// `scale` counts from 0 on the coarsest detail band to `levels - 1` on
    /// the finest.
    Detail { scale: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub axes: Vec<AxisBand>,
}

impl Band {
    pub fn is_sample(&self) -> bool {
        self.axes.iter().all(|a| *a == AxisBand::Sample)
    }

    /// Scale tuple used for thresholding; sample axes contribute 0.
    pub fn scales(&self) -> Vec<u32> {
        self.axes
            .iter()
            .map(|a| match a {
                AxisBand::Sample => 0,
                AxisBand::Detail { scale } => *scale,
            })
            .collect()
    }
}

/// 1-D step index per position: 0 for samples, `levels` for the coarsest
/// details down to 1 for the finest.
fn axis_steps(len: usize, levels: u32) -> Vec<u32> {
    let mut steps = vec![0; len];
    for step in 1..=levels {
        let lo = ((len - 1) >> step) + 1;
        let hi = ((len - 1) >> (step - 1)) + 1;
        for s in &mut steps[lo..hi] {
            *s = step;
        }
    }
    steps
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    plan: WaveletPlan,
    values: Vec<f64>,
}

impl CoefficientSet {
    pub fn from_parts(plan: WaveletPlan, values: Vec<f64>) -> Result<Self, WaveletError> {
        if values.len() != plan.len() {
            return Err(WaveletError::CoefficientCount {
                expected: plan.len(),
                got: values.len(),
            });
        }
        Ok(Self { plan, values })
    }

    pub fn plan(&self) -> &WaveletPlan {
        &self.plan
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn band_at(&self, idx: &[usize]) -> Band {
        let levels = self.plan.levels;
        let steps: Vec<u32> = idx
            .iter()
            .zip(&self.plan.dims)
            .map(|(&i, &n)| axis_steps(n, levels)[i])
            .collect();
        Band {
            axes: classify(&steps, levels, self.plan.traversal),
        }
    }

    pub fn band(&self, flat: usize) -> Band {
        let st = strides(&self.plan.dims);
        let idx: Vec<usize> = st
            .iter()
            .zip(&self.plan.dims)
            .map(|(&s, &n)| (flat / s) % n)
            .collect();
        self.band_at(&idx)
    }

    /// Calls `f(scales, value)` for every coefficient that is a detail along
    /// at least one axis.
    pub fn for_each_detail_mut(&mut self, mut f: impl FnMut(&[u32], &mut f64)) {
        let levels = self.plan.levels;
        if levels == 0 {
            return;
        }
        let dims = self.plan.dims.clone();
        let tables: Vec<Vec<u32>> = dims.iter().map(|&n| axis_steps(n, levels)).collect();
        let traversal = self.plan.traversal;
        let mut idx = vec![0; dims.len()];
        let mut steps = vec![0; dims.len()];
        let mut scales = vec![0; dims.len()];
        let mut flat = 0;
        loop {
            for (a, &i) in idx.iter().enumerate() {
                steps[a] = tables[a][i];
            }
            if detail_scales(&steps, levels, traversal, &mut scales) {
                f(&scales, &mut self.values[flat]);
            }
            flat += 1;
            if !next_index(&mut idx, &dims) {
                break;
            }
        }
    }
}

/// Writes the threshold scale tuple into `scales`; returns `false` for pure
/// samples.
fn detail_scales(steps: &[u32], levels: u32, traversal: Traversal, scales: &mut [u32]) -> bool {
    match traversal {
        Traversal::Tensor => {
            let mut any = false;
            for (s, &step) in scales.iter_mut().zip(steps) {
                if step == 0 {
                    *s = 0;
                } else {
                    any = true;
                    *s = levels - step;
                }
            }
            any
        }
        Traversal::Pyramid => {
            // A coefficient belongs to the finest level it is a detail of;
            // along the other axes it is a sample of that level.
            let Some(level) = steps.iter().copied().filter(|&s| s > 0).min() else {
                return false;
            };
            for (s, &step) in scales.iter_mut().zip(steps) {
                *s = if step == level { levels - level } else { 0 };
            }
            true
        }
    }
}

fn classify(steps: &[u32], levels: u32, traversal: Traversal) -> Vec<AxisBand> {
    let finest = steps.iter().copied().filter(|&s| s > 0).min();
    steps
        .iter()
        .map(|&step| {
            let is_detail = match traversal {
                Traversal::Tensor => step > 0,
                Traversal::Pyramid => step > 0 && Some(step) == finest,
            };
            if is_detail {
                AxisBand::Detail { scale: levels - step }
            } else {
                AxisBand::Sample
            }
        })
        .collect()
}

/// Visits every line along `axis` inside the low-corner box `extent` of a
/// row-major array with full shape `dims`.
fn for_each_line(
    data: &mut [f64],
    dims: &[usize],
    extent: &[usize],
    axis: usize,
    line: &mut Vec<f64>,
    mut f: impl FnMut(&mut [f64]),
) {
    let st = strides(dims);
    let stride = st[axis];
    let len = extent[axis];
    let mut outer: Vec<usize> = extent.to_vec();
    outer[axis] = 1;
    let mut idx = vec![0; dims.len()];
    loop {
        let base: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
        line.clear();
        line.extend((0..len).map(|k| data[base + k * stride]));
        f(line);
        for (k, v) in line.iter().enumerate() {
            data[base + k * stride] = *v;
        }
        if !next_index(&mut idx, &outer) {
            break;
        }
    }
}

/// Forward transform of a row-major block in place.
pub fn forward_in_place(data: &mut [f64], plan: &WaveletPlan) {
    assert_eq!(data.len(), plan.len(), "data does not match plan");
    let dims = &plan.dims;
    let mut line = Vec::new();
    let mut scratch = Vec::new();
    match plan.traversal {
        Traversal::Tensor => {
            for axis in 0..dims.len() {
                for_each_line(data, dims, dims, axis, &mut line, |l| {
                    lifting::forward_multilevel(l, plan.levels, &mut scratch)
                });
            }
        }
        Traversal::Pyramid => {
            let mut extent = dims.clone();
            for _ in 0..plan.levels {
                for axis in 0..dims.len() {
                    for_each_line(data, dims, &extent, axis, &mut line, |l| {
                        lifting::forward_in_place(l, &mut scratch)
                    });
                }
                for e in &mut extent {
                    *e = (*e - 1) / 2 + 1;
                }
            }
        }
    }
}

/// Inverse of [`forward_in_place`].
pub fn inverse_in_place(data: &mut [f64], plan: &WaveletPlan) {
    assert_eq!(data.len(), plan.len(), "data does not match plan");
    let dims = &plan.dims;
    let mut line = Vec::new();
    let mut scratch = Vec::new();
    match plan.traversal {
        Traversal::Tensor => {
            for axis in (0..dims.len()).rev() {
                for_each_line(data, dims, dims, axis, &mut line, |l| {
                    lifting::inverse_multilevel(l, plan.levels, &mut scratch)
                });
            }
        }
        Traversal::Pyramid => {
            for level in (0..plan.levels).rev() {
                let extent: Vec<usize> = dims.iter().map(|&n| ((n - 1) >> level) + 1).collect();
                for axis in (0..dims.len()).rev() {
                    for_each_line(data, dims, &extent, axis, &mut line, |l| {
                        lifting::inverse_in_place(l, &mut scratch)
                    });
                }
            }
        }
    }
}

pub fn dwt_nd(field: &Field, plan: &WaveletPlan) -> Result<CoefficientSet, WaveletError> {
    if field.dims() != plan.dims() {
        return Err(WaveletError::PlanMismatch {
            field: field.dims().to_vec(),
            plan: plan.dims().to_vec(),
        });
    }
    let mut values = field.data().to_vec();
    forward_in_place(&mut values, plan);
    Ok(CoefficientSet {
        plan: plan.clone(),
        values,
    })
}

pub fn idwt_nd(coeffs: &CoefficientSet) -> Field {
    let mut values = coeffs.values.clone();
    inverse_in_place(&mut values, &coeffs.plan);
    Field::from_vec(coeffs.plan.dims(), values).expect("plan dims were validated")
}
