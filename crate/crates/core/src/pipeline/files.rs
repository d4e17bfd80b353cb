use std::path::Path;

use crate::codec::{Codec, CompressedPatch};
use crate::field::Field;
use crate::patchgrid::{read_wgrd_file, write_wgrd_file};
use crate::threshold::{apply_threshold, ThresholdSpec};
use crate::wavelet::{forward_in_place, inverse_in_place, CoefficientSet, WaveletPlan};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub dims: Vec<usize>,
    pub components: usize,
    pub zeroed: usize,
    pub dense_bytes: usize,
    pub compressed_bytes: usize,
    pub file_bytes: usize,
}

impl TransformReport {
    pub fn ratio(&self) -> f64 {
        self.dense_bytes as f64 / self.compressed_bytes as f64
    }
}

/// `WGRD` snapshot to `WGC1` container: transform, threshold, encode.
pub fn transform_file(
    input: &Path,
    output: &Path,
    levels: u32,
    spec: &ThresholdSpec,
    codec: Codec,
) -> Result<TransformReport, PipelineError> {
    let fields = read_wgrd_file(input)?;
    let dims = fields[0].dims().to_vec();
    let plan = WaveletPlan::new(&dims, levels)?;
    let mut zeroed = 0;
    let mut coeffs = Vec::with_capacity(fields.len());
    for f in fields {
        let mut v = f.into_vec();
        forward_in_place(&mut v, &plan);
        let mut c = CoefficientSet::from_parts(plan.clone(), v)?;
        zeroed += apply_threshold(&mut c, spec);
        coeffs.push(c);
    }
    let slices: Vec<&[f64]> = coeffs.iter().map(|c| c.values()).collect();
    let packed = CompressedPatch::encode(codec, &dims, levels, &slices)?;
    let bytes = packed.to_bytes();
    std::fs::write(output, &bytes)?;
    Ok(TransformReport {
        dims,
        components: slices.len(),
        zeroed,
        dense_bytes: packed.dense_bytes(),
        compressed_bytes: packed.compressed_bytes(),
        file_bytes: bytes.len(),
    })
}

/// `WGC1` container back to a `WGRD` snapshot.
pub fn restore_file(input: &Path, output: &Path) -> Result<Vec<Field>, PipelineError> {
    let packed = CompressedPatch::from_bytes(&std::fs::read(input)?)?;
    let plan = WaveletPlan::new(packed.dims(), packed.levels())?;
    let fields = packed
        .decode()?
        .into_iter()
        .map(|mut v| {
            inverse_in_place(&mut v, &plan);
            Field::from_vec(packed.dims(), v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_wgrd_file(output, &fields)?;
    Ok(fields)
}
