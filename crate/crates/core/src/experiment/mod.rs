//! Experiment plumbing behind the `bitload` binary: configs, presets,
//! sweep execution and CSV/JSON output.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

use thiserror::Error;

use crate::error::Error;

pub use config::{ChannelConfig, ChannelSource, ExperimentConfig, Method, Study, Sweep, SweepAxis};
pub use run::{
    base_point, run_allocation, run_sweep, sweep_points, AllocationResult, Point, SweepResults,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    /// 2 for bad input, 3 when a solver fails on valid input.
    pub fn exit_code(&self) -> u8 {
        match self {
            ExperimentError::Numerical(
                Error::NoConvergence { .. } | Error::BracketViolation { .. },
            ) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}
