//! Convergence and work-precision sweeps over the surrogate-model integrators.

pub mod config;
pub mod report;
pub mod setup;
pub mod sweep;

use std::path::PathBuf;

use smmr_core::coefficients::SchemeError;
use smmr_core::integrators::IntegrationError;
use smmr_core::problems::ProblemError;
use smmr_core::projections::ProjectionError;
use thiserror::Error;

pub use config::{MethodSpec, ProblemConfig, ProblemKind, ProjectionChoice, StepSequence, SweepConfig};
pub use report::{emit_csv, write_csv};
pub use setup::{build_problem, ProblemSetup};
pub use sweep::{
    convergence_study, fit_slope, reference_solve, relative_l2_error, run_sweep, work_precision,
    SweepReport, SweepRow,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
}

impl HarnessError {
    /// 2 for anything wrong with the requested configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Scheme(_) | Self::Projection(_) => 2,
            Self::Problem(ProblemError::InvalidParameter(_) | ProblemError::Projection(_)) => 2,
            Self::Problem(ProblemError::Integration(_))
            | Self::Integration(_)
            | Self::Io { .. }
            | Self::Csv { .. } => 1,
        }
    }
}
