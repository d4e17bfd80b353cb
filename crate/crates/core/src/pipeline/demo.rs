use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::codec::{Codec, CompressedPatch};
use crate::field::Field;
use crate::patchgrid::write_wgrd_file;
use crate::threshold::{apply_threshold, ThresholdMode, ThresholdSpec};
use crate::wavelet::{dwt_nd, idwt_nd, trapezoid_mass_nd, Traversal, WaveletPlan};

use super::PipelineError;

pub const DEMO_POINTS: usize = 129;
pub const DEMO_LEVELS: u32 = 6;
pub const DEMO_THRESHOLD: f64 = 0.2;

/// `e^(x-y) sin(2 pi (x+y)) step(y - x^2)` with `step(s) = 1` for `s >= 0`
/// and `2` otherwise.
pub fn discontinuous_function(x: f64, y: f64) -> f64 {
    let step = if y - x * x >= 0.0 { 1.0 } else { 2.0 };
    (x - y).exp() * (2.0 * PI * (x + y)).sin() * step
}

/// `n x n` samples at `x_i = i / n`, axis 0 along x.
pub fn discontinuous_field(n: usize) -> Field {
    let h = 1.0 / n as f64;
    Field::from_fn(&[n, n], |i| discontinuous_function(i[0] as f64 * h, i[1] as f64 * h)).expect("nonempty")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport {
    pub total: usize,
    pub nonzeros: usize,
    pub zeroed: usize,
    /// `total / nonzeros`.
    pub count_ratio: f64,
    pub dense_bytes: usize,
    pub csr_bytes: usize,
    pub csr_ratio: f64,
    pub mass_before: f64,
    pub mass_after: f64,
    pub max_abs_error: f64,
    /// Nonzeros with the level-by-level traversal, for comparison.
    pub pyramid_nonzeros: usize,
    pub files: Vec<PathBuf>,
}

impl DemoReport {
    pub fn relative_mass_delta(&self) -> f64 {
        (self.mass_after - self.mass_before).abs() / self.mass_before.abs()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "grid               {DEMO_POINTS}x{DEMO_POINTS}, {DEMO_LEVELS} levels");
        let _ = writeln!(s, "coefficients       {}", self.total);
        let _ = writeln!(s, "nonzero            {}", self.nonzeros);
        let _ = writeln!(s, "zeroed details     {}", self.zeroed);
        let _ = writeln!(s, "count ratio        {:.3}", self.count_ratio);
        let _ = writeln!(s, "csr bytes          {} of {}", self.csr_bytes, self.dense_bytes);
        let _ = writeln!(s, "csr ratio          {:.3}", self.csr_ratio);
        let _ = writeln!(s, "mass before        {}", self.mass_before);
        let _ = writeln!(s, "mass after         {}", self.mass_after);
        let _ = writeln!(s, "relative mass diff {:e}", self.relative_mass_delta());
        let _ = writeln!(s, "max abs error      {:e}", self.max_abs_error);
        let _ = writeln!(s, "pyramid nonzero    {}", self.pyramid_nonzeros);
        s
    }
}

fn count_nonzero(values: &[f64]) -> usize {
    values.iter().filter(|v| **v != 0.0).count()
}

/// Transforms the discontinuous test function, zeroes details below
/// `threshold` (constant law) and reconstructs. Writes `original.wgrd`,
/// `reconstructed.wgrd` and `report.txt` when `out_dir` is given.
pub fn demo_discontinuous(out_dir: Option<&Path>, threshold: f64) -> Result<DemoReport, PipelineError> {
    let field = discontinuous_field(DEMO_POINTS);
    let spec = ThresholdSpec::new(ThresholdMode::Constant, threshold)?;

    let plan = WaveletPlan::new(field.dims(), DEMO_LEVELS)?;
    let mut coeffs = dwt_nd(&field, &plan)?;
    let zeroed = apply_threshold(&mut coeffs, &spec);
    let nonzeros = count_nonzero(coeffs.values());
    let packed = CompressedPatch::encode(Codec::Csr, field.dims(), DEMO_LEVELS, &[coeffs.values()])?;
    let restored = idwt_nd(&coeffs);

    let pyramid = WaveletPlan::with_traversal(field.dims(), DEMO_LEVELS, Traversal::Pyramid)?;
    let mut pc = dwt_nd(&field, &pyramid)?;
    apply_threshold(&mut pc, &spec);

    let max_abs_error = field
        .data()
        .iter()
        .zip(restored.data())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let mut report = DemoReport {
        total: field.len(),
        nonzeros,
        zeroed,
        count_ratio: field.len() as f64 / nonzeros as f64,
        dense_bytes: packed.dense_bytes(),
        csr_bytes: packed.compressed_bytes(),
        csr_ratio: packed.dense_bytes() as f64 / packed.compressed_bytes() as f64,
        mass_before: trapezoid_mass_nd(field.dims(), field.data()),
        mass_after: trapezoid_mass_nd(restored.dims(), restored.data()),
        max_abs_error,
        pyramid_nonzeros: count_nonzero(pc.values()),
        files: Vec::new(),
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let original = dir.join("original.wgrd");
        let reconstructed = dir.join("reconstructed.wgrd");
        let text = dir.join("report.txt");
        write_wgrd_file(&original, &[field])?;
        write_wgrd_file(&reconstructed, &[restored])?;
        std::fs::write(&text, report.render())?;
        report.files = vec![original, reconstructed, text];
    }
    Ok(report)
}
