//! Turns a [`ProblemConfig`] into a model pair, initial state and interval.

use std::sync::Arc;

use smmr_core::integrators::{ModelPair, ProjectedRhs, Rhs};
use smmr_core::problems::{
    linear_test_problem, rotation_matrix, Advection, AdvectionSpec, Brusselator, BrusselatorSpec,
    Lorenz96Spec,
};
use smmr_core::projections::{coarse_size, ProjectionPair};

use crate::config::{ProblemConfig, ProblemKind, ProjectionChoice};
use crate::HarnessError;

/// Lorenz '96 runs start from the spun-up state and cover this window.
pub const LORENZ_WINDOW: f64 = 0.5;
pub const LINEAR_MU: f64 = 0.5;

pub struct ProblemSetup {
    pub kind: ProblemKind,
    pub models: ModelPair,
    pub y0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub description: String,
}

fn reject(kind: ProblemKind, flag: &str) -> HarnessError {
    HarnessError::Config(format!("{flag} does not apply to problem {kind}"))
}

/// Galerkin surrogate `W* g(t, V z)` of a full-space model `g`.
fn projected(
    model: Arc<dyn Rhs>,
    surrogate_source: Arc<dyn Rhs>,
    projection: ProjectionPair,
) -> Result<ModelPair, HarnessError> {
    let projection = Arc::new(projection);
    let surrogate = ProjectedRhs::new(surrogate_source, Arc::clone(&projection))?;
    Ok(ModelPair::new(model, Arc::new(surrogate), projection)?)
}

fn load_projection(choice: &ProjectionChoice, n: usize, kind: ProblemKind) -> Result<ProjectionPair, HarnessError> {
    let p = match choice {
        ProjectionChoice::Default | ProjectionChoice::Identity => ProjectionPair::identity(n)?,
        ProjectionChoice::Mesh1d => ProjectionPair::nested_mesh_1d(n)?,
        ProjectionChoice::Mesh2d => {
            return Err(HarnessError::Config(format!("mesh2d projection does not apply to problem {kind}")))
        }
        ProjectionChoice::File(path) => ProjectionPair::from_basis_file(path)?,
    };
    if p.dim_full() != n {
        return Err(HarnessError::Config(format!(
            "projection has full dimension {}, problem {kind} has {n}",
            p.dim_full()
        )));
    }
    Ok(p)
}

pub fn build_problem(cfg: &ProblemConfig) -> Result<ProblemSetup, HarnessError> {
    let kind = cfg.kind;
    if let Some(t) = cfg.t_end {
        if !(t > 0.0) || !t.is_finite() {
            return Err(HarnessError::Config(format!("--tend must be positive, got {t}")));
        }
    }
    match kind {
        ProblemKind::Lorenz96 => {
            if cfg.fine_p.is_some() {
                return Err(reject(kind, "--fine-p"));
            }
            if cfg.coarse_p.is_some() {
                return Err(reject(kind, "--coarse-p"));
            }
            let mut spec = Lorenz96Spec::default();
            if let Some(fs) = cfg.surrogate_forcing {
                spec.surrogate_forcing = fs;
            }
            let models = match &cfg.projection {
                ProjectionChoice::Default | ProjectionChoice::Identity => spec.model_pair()?,
                other => {
                    spec.validate()?;
                    let p = load_projection(other, spec.k, kind)?;
                    projected(Arc::new(spec.full()), Arc::new(spec.surrogate()), p)?
                }
            };
            Ok(ProblemSetup {
                kind,
                models,
                y0: spec.spun_up_state()?,
                t0: 0.0,
                t_end: cfg.t_end.unwrap_or(LORENZ_WINDOW),
                description: format!(
                    "lorenz96 K={} F={} F_s={}",
                    spec.k, spec.forcing, spec.surrogate_forcing
                ),
            })
        }
        ProblemKind::Brusselator => {
            if cfg.surrogate_forcing.is_some() {
                return Err(reject(kind, "--surrogate-forcing"));
            }
            let spec = BrusselatorSpec::with_p(cfg.fine_p.unwrap_or(65));
            spec.validate()?;
            let models = match &cfg.projection {
                ProjectionChoice::Default | ProjectionChoice::Mesh2d => {
                    let coarse = match cfg.coarse_p {
                        Some(c) => c,
                        None => coarse_size(spec.p)?,
                    };
                    spec.model_pair(coarse)?
                }
                other => {
                    if cfg.coarse_p.is_some() {
                        return Err(HarnessError::Config(
                            "--coarse-p needs the mesh2d projection".into(),
                        ));
                    }
                    let p = match other {
                        ProjectionChoice::Mesh1d => {
                            return Err(HarnessError::Config(
                                "mesh1d projection does not apply to problem brusselator".into(),
                            ))
                        }
                        o => load_projection(o, spec.dim(), kind)?,
                    };
                    let fine: Arc<dyn Rhs> = Arc::new(Brusselator::new(spec)?);
                    projected(Arc::clone(&fine), fine, p)?
                }
            };
            Ok(ProblemSetup {
                kind,
                y0: spec.initial_state(),
                t0: 0.0,
                t_end: cfg.t_end.unwrap_or(spec.t_end),
                description: format!(
                    "brusselator P={} surrogate dim {}",
                    spec.p,
                    models.dim_surrogate()
                ),
                models,
            })
        }
        ProblemKind::Advection => {
            if cfg.surrogate_forcing.is_some() {
                return Err(reject(kind, "--surrogate-forcing"));
            }
            let spec = AdvectionSpec::with_p(cfg.fine_p.unwrap_or(101));
            spec.validate()?;
            let models = match &cfg.projection {
                ProjectionChoice::Default | ProjectionChoice::Mesh2d => {
                    let coarse = match cfg.coarse_p {
                        Some(c) => c,
                        None => coarse_size(spec.p)?,
                    };
                    spec.model_pair(coarse)?
                }
                other => {
                    if cfg.coarse_p.is_some() {
                        return Err(HarnessError::Config(
                            "--coarse-p needs the mesh2d projection".into(),
                        ));
                    }
                    let p = match other {
                        ProjectionChoice::Mesh1d => {
                            return Err(HarnessError::Config(
                                "mesh1d projection does not apply to problem advection".into(),
                            ))
                        }
                        o => load_projection(o, spec.dim(), kind)?,
                    };
                    let fine: Arc<dyn Rhs> = Arc::new(Advection::new(spec)?);
                    projected(Arc::clone(&fine), fine, p)?
                }
            };
            Ok(ProblemSetup {
                kind,
                y0: spec.initial_state(),
                t0: 0.0,
                t_end: cfg.t_end.unwrap_or(spec.t_end),
                description: format!(
                    "advection P={} surrogate dim {}",
                    spec.p,
                    models.dim_surrogate()
                ),
                models,
            })
        }
        ProblemKind::Linear => {
            if cfg.fine_p.is_some() {
                return Err(reject(kind, "--fine-p"));
            }
            if cfg.coarse_p.is_some() {
                return Err(reject(kind, "--coarse-p"));
            }
            if cfg.surrogate_forcing.is_some() {
                return Err(reject(kind, "--surrogate-forcing"));
            }
            let models = match &cfg.projection {
                ProjectionChoice::Default | ProjectionChoice::Identity => {
                    linear_test_problem(2, rotation_matrix(), LINEAR_MU)?
                }
                other => {
                    let p = load_projection(other, 2, kind)?;
                    let pair = linear_test_problem(2, rotation_matrix(), LINEAR_MU)?;
                    projected(
                        Arc::clone(pair.full_model()),
                        Arc::clone(pair.surrogate_model()),
                        p,
                    )?
                }
            };
            Ok(ProblemSetup {
                kind,
                models,
                y0: vec![1.0, 0.0],
                t0: 0.0,
                t_end: cfg.t_end.unwrap_or(1.0),
                description: format!("linear rotation, mu={LINEAR_MU}"),
            })
        }
    }
}
