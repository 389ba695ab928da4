//! Micro-stepping of the forced surrogate ODEs.

use crate::coefficients::{horner, CouplingScheme, RkTableau};

use super::{all_finite, axpy, IntegrationError};

/// Explicit method and number of equal micro-steps used for every forced
/// surrogate ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolverConfig {
    method: RkTableau,
    micro_steps: usize,
}

impl InnerSolverConfig {
    pub fn new(method: RkTableau, micro_steps: usize) -> Result<Self, IntegrationError> {
        if micro_steps == 0 {
            return Err(IntegrationError::ZeroSteps);
        }
        Ok(Self {
            method,
            micro_steps,
        })
    }

    /// Built-in method of the given order.
    pub fn with_order(order: u32, micro_steps: usize) -> Result<Self, IntegrationError> {
        Self::new(RkTableau::with_order(order)?, micro_steps)
    }

    /// Default for a scheme: one order above it.
    pub fn for_scheme(scheme: &CouplingScheme, micro_steps: usize) -> Result<Self, IntegrationError> {
        Self::with_order(scheme.order() + 1, micro_steps)
    }

    pub fn method(&self) -> &RkTableau {
        &self.method
    }

    pub fn micro_steps(&self) -> usize {
        self.micro_steps
    }

    /// Surrogate evaluations of one inner solve without reuse, `m · s_inner`.
    pub fn evals_per_solve(&self) -> u64 {
        (self.micro_steps * self.method.stages()) as u64
    }
}

/// A slow tendency `ℓ` entering the fast ODE with weight `γ(θ/H)`.
#[derive(Debug, Clone, Copy)]
pub struct ForcingTerm<'a> {
    /// Polynomial coefficients of `γ`, lowest degree first.
    pub weight: &'a [f64],
    pub direction: &'a [f64],
}

/// Solves `z' = scale·f_s(t_offset + scale·θ, z) + Σ_j γ_j(θ/H) ℓ_j` over
/// `θ ∈ [0, H]` from `z0`, with `m` equal micro-steps.
///
/// When `first_eval` holds `f_s(t_offset, z0)`, already computed by the
/// caller, it stands in for the first stage evaluation, so the solve calls
/// `surrogate` `m·s − 1` times instead of `m·s`.
#[allow(clippy::too_many_arguments)]
pub fn inner_solve(
    config: &InnerSolverConfig,
    mut surrogate: impl FnMut(f64, &[f64], &mut [f64]),
    forcing: &[ForcingTerm<'_>],
    scale: f64,
    t_offset: f64,
    h: f64,
    z0: &[f64],
    first_eval: Option<&[f64]>,
) -> Result<Vec<f64>, IntegrationError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(IntegrationError::InvalidStepSize(h));
    }
    let n = z0.len();
    for (j, term) in forcing.iter().enumerate() {
        if term.direction.len() != n {
            return Err(IntegrationError::DimensionMismatch {
                what: "forcing term",
                expected: n,
                found: term.direction.len(),
            });
        }
        if !all_finite(term.direction) {
            return Err(IntegrationError::NonFiniteForcing { term: j });
        }
    }
    if let Some(f) = first_eval {
        if f.len() != n {
            return Err(IntegrationError::DimensionMismatch {
                what: "precomputed surrogate evaluation",
                expected: n,
                found: f.len(),
            });
        }
    }

    let tab = &config.method;
    let s = tab.stages();
    let m = config.micro_steps;
    let dh = h / m as f64;
    let reuse = first_eval.filter(|_| tab.c()[0] == 0.0);

    let mut z = z0.to_vec();
    let mut k = vec![vec![0.0; n]; s];
    let mut stage = vec![0.0; n];
    for q in 0..m {
        for r in 0..s {
            stage.copy_from_slice(&z);
            for j in 0..r {
                let a = tab.a(r, j);
                if a != 0.0 {
                    axpy(dh * a, &k[j], &mut stage);
                }
            }
            let theta = (q as f64 + tab.c()[r]) * dh;
            let tau = ((q as f64 + tab.c()[r]) / m as f64).min(1.0);
            let kr = &mut k[r];
            match reuse {
                Some(f) if q == 0 && r == 0 => kr.copy_from_slice(f),
                _ => surrogate(t_offset + scale * theta, &stage, kr),
            }
            if scale != 1.0 {
                kr.iter_mut().for_each(|v| *v *= scale);
            }
            for term in forcing {
                let g = horner(term.weight, tau);
                if g != 0.0 {
                    axpy(g, term.direction, kr);
                }
            }
        }
        for (kr, &br) in k.iter().zip(tab.b()) {
            if br != 0.0 {
                axpy(dh * br, kr, &mut z);
            }
        }
        if !all_finite(&z) {
            return Err(IntegrationError::NonFiniteInnerState { micro_step: q });
        }
    }
    Ok(z)
}
