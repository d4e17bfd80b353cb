//! Experiment orchestration: the per-step compression cycle, metrics,
//! parameter sweeps, the discontinuous-function demo and file transforms.

mod config;
mod demo;
mod files;
mod metrics;
mod simulation;
mod sweep;

use std::io;

use thiserror::Error;

use crate::codec::CodecError;
use crate::field::FieldError;
use crate::patchgrid::{PatchError, SnapshotError};
use crate::solver::SolverError;
use crate::threshold::ThresholdError;
use crate::wavelet::WaveletError;

pub use config::{parse_splits, CompressionConfig, Scheme, SimConfig};
pub use demo::{demo_discontinuous, discontinuous_field, discontinuous_function, DemoReport, DEMO_LEVELS, DEMO_POINTS, DEMO_THRESHOLD};
pub use files::{restore_file, transform_file, TransformReport};
pub use metrics::{least_squares_slope, PhaseTimes, RunMetrics, StepMetrics, CSV_HEADER};
pub use simulation::{run, RunOptions, RunReport, Simulation};
pub use sweep::{sweep, SweepConfig, SweepRow};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Patch(#[from] PatchError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<ThresholdError> for PipelineError {
    fn from(e: ThresholdError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

impl From<FieldError> for PipelineError {
    fn from(e: FieldError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

impl PipelineError {
    /// 2 for configuration errors, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Wavelet(_) => 2,
            PipelineError::Patch(PatchError::Inconsistent { .. }) => 3,
            PipelineError::Patch(_) => 2,
            PipelineError::Numerical(_) | PipelineError::Solver(_) => 3,
            PipelineError::Codec(CodecError::UnknownCodec(_) | CodecError::ChunkSize(_)) => 2,
            PipelineError::Codec(_) | PipelineError::Snapshot(_) | PipelineError::Io(_) => 1,
        }
    }
}
