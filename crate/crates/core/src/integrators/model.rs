use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::IntegrationError;
use crate::projections::ProjectionPair;

/// Right-hand side `f(t, y)` of an ODE system.
///
/// Implementations must be pure functions of `(t, y)`; the harness may call
/// them from several threads when sweeps run in parallel.
pub trait Rhs: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `f(t, y)` into `dydt`.
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

/// Adapts a closure to [`Rhs`].
pub struct FnRhs<F> {
    dim: usize,
    f: F,
}

impl<F> FnRhs<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Rhs for FnRhs<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.f)(t, y, dydt)
    }
}

/// `f ≡ 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroRhs(pub usize);

impl Rhs for ZeroRhs {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, _t: f64, _y: &[f64], dydt: &mut [f64]) {
        dydt.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Galerkin surrogate `z ↦ W* g(t, V z)` built from a full-space model `g`.
pub struct ProjectedRhs {
    inner: Arc<dyn Rhs>,
    projection: Arc<ProjectionPair>,
}

impl ProjectedRhs {
    pub fn new(inner: Arc<dyn Rhs>, projection: Arc<ProjectionPair>) -> Result<Self, IntegrationError> {
        if inner.dim() != projection.dim_full() {
            return Err(IntegrationError::DimensionMismatch {
                what: "projected model",
                expected: projection.dim_full(),
                found: inner.dim(),
            });
        }
        Ok(Self { inner, projection })
    }
}

impl Rhs for ProjectedRhs {
    fn dim(&self) -> usize {
        self.projection.dim_surrogate()
    }

    fn eval(&self, t: f64, z: &[f64], dydt: &mut [f64]) {
        let y = self.projection.lift(z);
        let mut fy = vec![0.0; y.len()];
        self.inner.eval(t, &y, &mut fy);
        self.projection.restrict_into(&fy, dydt);
    }
}

/// A full model, a surrogate, and the projections between their spaces,
/// with counters of right-hand side evaluations.
pub struct ModelPair {
    full: Arc<dyn Rhs>,
    surrogate: Arc<dyn Rhs>,
    projection: Arc<ProjectionPair>,
    full_evals: AtomicU64,
    surrogate_evals: AtomicU64,
}

impl fmt::Debug for ModelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelPair")
            .field("dim_full", &self.full.dim())
            .field("dim_surrogate", &self.surrogate.dim())
            .field("projection", &self.projection.kind())
            .field("full_evals", &self.full_evals())
            .field("surrogate_evals", &self.surrogate_evals())
            .finish()
    }
}

impl ModelPair {
    pub fn new(
        full: Arc<dyn Rhs>,
        surrogate: Arc<dyn Rhs>,
        projection: Arc<ProjectionPair>,
    ) -> Result<Self, IntegrationError> {
        if full.dim() != projection.dim_full() {
            return Err(IntegrationError::DimensionMismatch {
                what: "full model",
                expected: projection.dim_full(),
                found: full.dim(),
            });
        }
        if surrogate.dim() != projection.dim_surrogate() {
            return Err(IntegrationError::DimensionMismatch {
                what: "surrogate model",
                expected: projection.dim_surrogate(),
                found: surrogate.dim(),
            });
        }
        Ok(Self {
            full,
            surrogate,
            projection,
            full_evals: AtomicU64::new(0),
            surrogate_evals: AtomicU64::new(0),
        })
    }

    /// Same models and projection, counters reset to zero.
    pub fn fresh(&self) -> Self {
        Self {
            full: Arc::clone(&self.full),
            surrogate: Arc::clone(&self.surrogate),
            projection: Arc::clone(&self.projection),
            full_evals: AtomicU64::new(0),
            surrogate_evals: AtomicU64::new(0),
        }
    }

    pub fn projection(&self) -> &ProjectionPair {
        &self.projection
    }

    pub fn full_model(&self) -> &Arc<dyn Rhs> {
        &self.full
    }

    pub fn surrogate_model(&self) -> &Arc<dyn Rhs> {
        &self.surrogate
    }

    pub fn dim_full(&self) -> usize {
        self.projection.dim_full()
    }

    pub fn dim_surrogate(&self) -> usize {
        self.projection.dim_surrogate()
    }

    /// `f(t, y)`, counted.
    pub fn eval_full(&self, t: f64, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim_full());
        self.full_evals.fetch_add(1, Ordering::Relaxed);
        self.full.eval(t, y, out);
    }

    /// `f_s(t, z)`, counted.
    pub fn eval_surrogate(&self, t: f64, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim_surrogate());
        self.surrogate_evals.fetch_add(1, Ordering::Relaxed);
        self.surrogate.eval(t, z, out);
    }

    pub fn full_evals(&self) -> u64 {
        self.full_evals.load(Ordering::Relaxed)
    }

    pub fn surrogate_evals(&self) -> u64 {
        self.surrogate_evals.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.full_evals.store(0, Ordering::Relaxed);
        self.surrogate_evals.store(0, Ordering::Relaxed);
    }
}
