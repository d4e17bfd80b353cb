//! Scale-dependent nullification of detail coefficients.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::wavelet::CoefficientSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("unknown threshold mode `{0}` (expected constant, accumulation or capped)")]
    UnknownMode(String),
    #[error("threshold constant must be >= 0, got {0}")]
    NegativeConstant(f64),
    #[error("threshold base must be > 1, got {0}")]
    InvalidBase(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    Constant,
    Accumulation,
    #[default]
    Capped,
}

impl FromStr for ThresholdMode {
    type Err = ThresholdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(Self::Constant),
            "accumulation" => Ok(Self::Accumulation),
            "capped" => Ok(Self::Capped),
            other => Err(ThresholdError::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::Accumulation => "accumulation",
            Self::Capped => "capped",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    mode: ThresholdMode,
    c: f64,
    alpha: f64,
}

impl ThresholdSpec {
    pub const DEFAULT_ALPHA: f64 = 2.0;

    pub fn new(mode: ThresholdMode, c: f64) -> Result<Self, ThresholdError> {
        Self::with_alpha(mode, c, Self::DEFAULT_ALPHA)
    }

    pub fn with_alpha(mode: ThresholdMode, c: f64, alpha: f64) -> Result<Self, ThresholdError> {
        if c.is_nan() || c < 0.0 {
            return Err(ThresholdError::NegativeConstant(c));
        }
        if alpha.is_nan() || alpha <= 1.0 || alpha.is_infinite() {
            return Err(ThresholdError::InvalidBase(alpha));
        }
        Ok(Self { mode, c, alpha })
    }

    pub fn mode(&self) -> ThresholdMode {
        self.mode
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Threshold for a band with per-axis scales, where 0 is the coarsest
/// detail band.
///
/// * constant: `c`
/// * capped: `c * alpha^max(j)`
/// * accumulation: `c * alpha^sum(j)`
pub fn band_threshold(scales: &[u32], spec: &ThresholdSpec) -> f64 {
    if spec.c == 0.0 {
        return 0.0;
    }
    let exponent = match spec.mode {
        ThresholdMode::Constant => return spec.c,
        ThresholdMode::Capped => scales.iter().copied().max().unwrap_or(0),
        ThresholdMode::Accumulation => scales.iter().sum(),
    };
    spec.c * spec.alpha.powi(exponent as i32)
}

/// Zeroes every detail with `|d| < T(band)` and returns how many details
/// fell below their threshold (exact zeros included).
pub fn apply_threshold(coeffs: &mut CoefficientSet, spec: &ThresholdSpec) -> usize {
    if spec.c == 0.0 {
        return 0;
    }
    let levels = coeffs.plan().levels();
    let ndim = coeffs.plan().dims().len();
    // per-band thresholds, indexed by the scale tuple read as base-`levels` digits
    let base = levels as usize;
    let table: Option<Vec<f64>> = (base.checked_pow(ndim as u32).filter(|&n| n <= 1 << 16)).map(|n| {
        let mut scales = vec![0u32; ndim];
        (0..n)
            .map(|mut code| {
                for s in scales.iter_mut().rev() {
                    *s = (code % base) as u32;
                    code /= base;
                }
                band_threshold(&scales, spec)
            })
            .collect()
    });
    let mut zeroed = 0;
    coeffs.for_each_detail_mut(|scales, v| {
        let t = match &table {
            Some(t) => t[scales.iter().fold(0, |acc, &s| acc * base + s as usize)],
            None => band_threshold(scales, spec),
        };
        if v.abs() < t {
            *v = 0.0;
            zeroed += 1;
        }
    });
    zeroed
}
