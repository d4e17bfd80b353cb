use std::fmt;
use std::str::FromStr;

use crate::codec::Codec;
use crate::solver::GRAVITY;
use crate::threshold::{ThresholdMode, ThresholdSpec};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Transport,
    Swe,
}

impl Scheme {
    pub fn components(&self) -> usize {
        match self {
            Scheme::Transport => 1,
            Scheme::Swe => 3,
        }
    }
}

impl FromStr for Scheme {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "transport" => Ok(Scheme::Transport),
            "swe" | "shallow-water" => Ok(Scheme::Swe),
            other => Err(PipelineError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Transport => "transport",
            Scheme::Swe => "swe",
        })
    }
}

/// Parses `PxP` (or `PxPxP`).
pub fn parse_splits(s: &str) -> Result<Vec<usize>, PipelineError> {
    s.trim()
        .split(['x', 'X'])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| PipelineError::Config(format!("bad split count `{p}` in `{s}`")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionConfig {
    pub enabled: bool,
    pub levels: u32,
    pub threshold: ThresholdSpec,
    pub codec: Codec,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            levels: 4,
            threshold: ThresholdSpec::new(ThresholdMode::Capped, 0.0).expect("valid"),
            codec: Codec::Csr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    /// Global logical points per axis, `P * 2^k + 1`.
    pub nx: usize,
    pub splits: Vec<usize>,
    pub cfl: f64,
    pub t_end: f64,
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
    pub compression: CompressionConfig,
    pub strict: bool,
    pub threads: Option<usize>,
    pub snapshot_times: Vec<f64>,
}

impl SimConfig {
    pub fn transport() -> Self {
        Self {
            scheme: Scheme::Transport,
            nx: 129,
            splits: vec![2, 2],
            cfl: 0.45,
            t_end: 0.5,
            alpha: 0.9,
            beta: 0.9,
            g: GRAVITY,
            compression: CompressionConfig::default(),
            strict: false,
            threads: None,
            snapshot_times: Vec::new(),
        }
    }

    pub fn swe() -> Self {
        Self {
            scheme: Scheme::Swe,
            t_end: 1.0,
            alpha: 0.0,
            beta: 0.0,
            ..Self::transport()
        }
    }

    /// Distinct cells per axis on the periodic unit square.
    pub fn cells(&self) -> usize {
        self.nx - 1
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if self.splits.len() != 2 {
            return fail(format!(
                "the finite-volume solvers are two-dimensional; got {} split axes",
                self.splits.len()
            ));
        }
        if self.nx < 3 {
            return fail(format!("nx must be at least 3, got {}", self.nx));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return fail(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end must be finite and >= 0, got {}", self.t_end));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return fail("alpha and beta must be finite".into());
        }
        if self.scheme == Scheme::Transport && self.alpha == 0.0 && self.beta == 0.0 {
            return fail("transport needs a nonzero velocity".into());
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return fail(format!("gravity must be positive, got {}", self.g));
        }
        if self.threads == Some(0) {
            return fail("threads must be >= 1".into());
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return fail(format!("bad snapshot time {t}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits() {
        assert_eq!(parse_splits("2x2").unwrap(), vec![2, 2]);
        assert_eq!(parse_splits("1X4x2").unwrap(), vec![1, 4, 2]);
        assert!(parse_splits("2x").is_err());
        assert!(parse_splits("0x2").is_err());
    }

    #[test]
    fn validation() {
        assert!(SimConfig::transport().validate().is_ok());
        assert!(SimConfig::swe().validate().is_ok());
        let mut c = SimConfig::transport();
        c.cfl = 0.0;
        assert!(matches!(c.validate(), Err(PipelineError::Config(_))));
        let mut c = SimConfig::transport();
        c.splits = vec![2, 2, 2];
        assert!(c.validate().is_err());
        assert_eq!(SimConfig::transport().dx(), 1.0 / 128.0);
        assert_eq!("SWE".parse::<Scheme>().unwrap(), Scheme::Swe);
    }
}
