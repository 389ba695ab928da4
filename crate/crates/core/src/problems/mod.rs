//! Benchmark problems and analytic fixtures.

mod advection;
mod brusselator;
mod linear;
mod lorenz96;

use thiserror::Error;

use crate::integrators::IntegrationError;
use crate::projections::ProjectionError;

pub use advection::{velocity, Advection, AdvectionSpec};
pub use brusselator::{brusselator_coarse_surrogate, brusselator_rhs, Brusselator, BrusselatorSpec};
pub use linear::{expm_apply, linear_test_problem, rotation_matrix, LinearRhs, ScalarRhs};
pub use lorenz96::{lorenz96_rhs, Lorenz96, Lorenz96Spec, SPIN_UP_TIME};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}
