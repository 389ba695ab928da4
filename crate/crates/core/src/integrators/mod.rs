//! Fixed-step time integrators: classic explicit Runge–Kutta and the
//! surrogate-model MRI-GARK / SPC-MRI-GARK steppers.

mod inner;
mod model;
mod rk;
mod surrogate;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::coefficients::{CouplingScheme, RkTableau, SchemeError, SchemeKind};

pub use inner::{inner_solve, ForcingTerm, InnerSolverConfig};
pub use model::{FnRhs, ModelPair, ProjectedRhs, Rhs, ZeroRhs};
pub use rk::rk_step;
pub use surrogate::{sm_mri_gark_step, sm_spc_mri_gark_step};

/// Tolerance for `‖ŷ − W* y‖∞ ≤ tol · max(1, ‖ŷ‖∞)` after each macro step.
pub const COHERENCE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("full model returned a non-finite value at t = {t}, stage {stage}")]
    NonFiniteRhs { t: f64, stage: usize },
    #[error("surrogate model returned a non-finite value at t = {t}, stage {stage}")]
    NonFiniteSurrogate { t: f64, stage: usize },
    #[error("inner solve produced a non-finite state in micro-step {micro_step}")]
    NonFiniteInnerState { micro_step: usize },
    #[error("forcing term {term} is not finite")]
    NonFiniteForcing { term: usize },
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("step size must be positive and finite, got {0}")]
    InvalidStepSize(f64),
    #[error("integration interval [{t0}, {t_end}] is empty")]
    InvalidInterval { t0: f64, t_end: f64 },
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("inner method order {inner} is below the scheme order {scheme}")]
    InnerOrderTooLow { inner: u32, scheme: u32 },
    #[error("expected a {expected} scheme, got {found}")]
    WrongSchemeKind {
        expected: SchemeKind,
        found: SchemeKind,
    },
    #[error("cached surrogate state drifted from W* y by {residual:e}")]
    CacheIncoherent { residual: f64 },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("macro step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<IntegrationError>,
    },
}

/// Full state `y` at time `t` with the cached surrogate state `ŷ = W* y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub t: f64,
    pub y: Vec<f64>,
    pub y_hat: Vec<f64>,
}

impl StepState {
    pub fn new(models: &ModelPair, t: f64, y: Vec<f64>) -> Result<Self, IntegrationError> {
        if y.len() != models.dim_full() {
            return Err(IntegrationError::DimensionMismatch {
                what: "initial state",
                expected: models.dim_full(),
                found: y.len(),
            });
        }
        let y_hat = models.projection().restrict(&y);
        Ok(Self { t, y, y_hat })
    }

    /// `‖ŷ − W* y‖∞ / max(1, ‖ŷ‖∞)`.
    pub fn coherence_residual(&self, models: &ModelPair) -> f64 {
        let r = models.projection().restrict(&self.y);
        let scale = self.y_hat.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        r.iter()
            .zip(&self.y_hat)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale
    }
}

pub(crate) fn check_state(models: &ModelPair, state: &StepState) -> Result<(), IntegrationError> {
    if state.y.len() != models.dim_full() {
        return Err(IntegrationError::DimensionMismatch {
            what: "full state",
            expected: models.dim_full(),
            found: state.y.len(),
        });
    }
    if state.y_hat.len() != models.dim_surrogate() {
        return Err(IntegrationError::DimensionMismatch {
            what: "surrogate state",
            expected: models.dim_surrogate(),
            found: state.y_hat.len(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// The four kinds of macro step the driver can take.
#[derive(Debug, Clone, PartialEq)]
pub enum Stepper {
    /// Plain Runge–Kutta on the full model.
    FullRk(RkTableau),
    /// Plain Runge–Kutta on the surrogate model in surrogate space; the full
    /// state is the lifted surrogate state.
    SurrogateRk(RkTableau),
    SmMri {
        scheme: CouplingScheme,
        inner: InnerSolverConfig,
    },
    SmSpc {
        scheme: CouplingScheme,
        inner: InnerSolverConfig,
    },
}

impl Stepper {
    /// Surrogate-model stepper for `scheme`, picking the MRI or SPC variant
    /// from its kind. The inner method must be at least as accurate as the
    /// scheme.
    pub fn surrogate_model(
        scheme: CouplingScheme,
        inner: InnerSolverConfig,
    ) -> Result<Self, IntegrationError> {
        if inner.method().order() < scheme.order() {
            return Err(IntegrationError::InnerOrderTooLow {
                inner: inner.method().order(),
                scheme: scheme.order(),
            });
        }
        Ok(match scheme.kind() {
            SchemeKind::DecoupledMri => Stepper::SmMri { scheme, inner },
            SchemeKind::StepPredictorCorrector => Stepper::SmSpc { scheme, inner },
        })
    }

    pub fn step(
        &self,
        models: &ModelPair,
        state: &StepState,
        h: f64,
    ) -> Result<StepState, IntegrationError> {
        match self {
            Stepper::FullRk(tab) => {
                check_state(models, state)?;
                let y = rk_step(tab, |t, y, o| models.eval_full(t, y, o), state.t, &state.y, h)?;
                let y_hat = models.projection().restrict(&y);
                Ok(StepState {
                    t: state.t + h,
                    y,
                    y_hat,
                })
            }
            Stepper::SurrogateRk(tab) => {
                check_state(models, state)?;
                let y_hat = rk_step(
                    tab,
                    |t, z, o| models.eval_surrogate(t, z, o),
                    state.t,
                    &state.y_hat,
                    h,
                )?;
                let y = models.projection().lift(&y_hat);
                Ok(StepState {
                    t: state.t + h,
                    y,
                    y_hat,
                })
            }
            Stepper::SmMri { scheme, inner } => sm_mri_gark_step(scheme, inner, models, state, h),
            Stepper::SmSpc { scheme, inner } => {
                sm_spc_mri_gark_step(scheme, inner, models, state, h)
            }
        }
    }

    /// Closed-form `(full, surrogate)` evaluation counts per macro step.
    pub fn evals_per_step(&self) -> (u64, u64) {
        match self {
            Stepper::FullRk(t) => (t.stages() as u64, 0),
            Stepper::SurrogateRk(t) => (0, t.stages() as u64),
            Stepper::SmMri { scheme, inner } => {
                let s = scheme.stages() as u64;
                let reused = inner.method().c()[0] == 0.0;
                (s, s * inner.evals_per_solve() + if reused { 0 } else { s })
            }
            Stepper::SmSpc { scheme, inner } => {
                let s = scheme.stages() as u64;
                (s, inner.evals_per_solve() + s)
            }
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Stepper::FullRk(t) | Stepper::SurrogateRk(t) => t.order(),
            Stepper::SmMri { scheme, .. } | Stepper::SmSpc { scheme, .. } => scheme.order(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IntegrateOptions {
    /// Record the state every `k` macro steps (and at the end).
    pub dense_stride: Option<usize>,
    /// Recompute `W* y` after every step and fail if it drifts from the
    /// cached `ŷ`.
    pub check_coherence: bool,
}

impl IntegrateOptions {
    /// Coherence checking on in debug builds only.
    pub fn debug_default() -> Self {
        Self {
            dense_stride: None,
            check_coherence: cfg!(debug_assertions),
        }
    }
}

/// Result of a fixed-step integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: f64,
    pub y: Vec<f64>,
    pub full_evals: u64,
    pub surrogate_evals: u64,
    pub wall: Duration,
    /// `(t, y)` every `dense_stride` steps, starting with the initial state.
    pub samples: Vec<(f64, Vec<f64>)>,
}

/// Takes `n_steps` equal macro steps `H = (t_end − t0) / n_steps` from `y0`.
///
/// Step `n` starts at `t_n = t0 + n·H`. Counts are the evaluations made by
/// this call; wall time covers the stepping loop only.
pub fn integrate(
    stepper: &Stepper,
    models: &ModelPair,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    n_steps: usize,
    options: &IntegrateOptions,
) -> Result<Trajectory, IntegrationError> {
    if n_steps == 0 {
        return Err(IntegrationError::ZeroSteps);
    }
    if !(t_end > t0) {
        return Err(IntegrationError::InvalidInterval { t0, t_end });
    }
    let h = (t_end - t0) / n_steps as f64;
    let mut state = StepState::new(models, t0, y0.to_vec())?;
    let (full0, surr0) = (models.full_evals(), models.surrogate_evals());
    let stride = options.dense_stride.filter(|&k| k > 0);
    let mut samples = Vec::new();
    if stride.is_some() {
        samples.push((t0, state.y.clone()));
    }

    let start = Instant::now();
    for n in 0..n_steps {
        let mut next = stepper
            .step(models, &state, h)
            .map_err(|e| IntegrationError::StepFailed {
                step: n,
                source: Box::new(e),
            })?;
        next.t = if n + 1 == n_steps { t_end } else { t0 + (n + 1) as f64 * h };
        if options.check_coherence {
            let residual = next.coherence_residual(models);
            if !(residual <= COHERENCE_TOL) {
                return Err(IntegrationError::StepFailed {
                    step: n,
                    source: Box::new(IntegrationError::CacheIncoherent { residual }),
                });
            }
        }
        state = next;
        if let Some(k) = stride {
            if (n + 1) % k == 0 || n + 1 == n_steps {
                samples.push((state.t, state.y.clone()));
            }
        }
    }
    let wall = start.elapsed();

    Ok(Trajectory {
        t: state.t,
        y: state.y,
        full_evals: models.full_evals() - full0,
        surrogate_evals: models.surrogate_evals() - surr0,
        wall,
        samples,
    })
}
