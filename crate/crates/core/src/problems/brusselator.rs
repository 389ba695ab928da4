//! 2D Brusselator reaction-diffusion on the unit square, method of lines.
//!
//! Vertex-centered `P × P` grid including the boundary, spacing
//! `h = 1/(P − 1)`, node `(ix, iy)` at index `iy·P + ix`. The state holds the
//! `u` block followed by the `v` block. Homogeneous Neumann conditions use
//! mirrored ghost nodes, which keeps the 5-point Laplacian second order.

use std::sync::Arc;

use crate::integrators::{ModelPair, Rhs};
use crate::projections::{coarse_size, ProjectionPair};

use super::ProblemError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrusselatorSpec {
    pub p: usize,
    pub alpha: f64,
    /// Coefficient of the `u` loss term, `B + 1`.
    pub decay: f64,
    /// Conversion rate `B` from `u` to `v`.
    pub conversion: f64,
    pub t_end: f64,
}

impl Default for BrusselatorSpec {
    fn default() -> Self {
        Self {
            p: 65,
            alpha: 0.002,
            decay: 4.4,
            conversion: 3.4,
            t_end: 7.5,
        }
    }
}

impl BrusselatorSpec {
    pub fn with_p(p: usize) -> Self {
        Self {
            p,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.p * self.p
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.p - 1) as f64
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.p < 3 {
            return Err(ProblemError::InvalidParameter(format!(
                "Brusselator grid needs P >= 3, got {}",
                self.p
            )));
        }
        if !(self.alpha >= 0.0) || !self.decay.is_finite() || !self.conversion.is_finite() {
            return Err(ProblemError::InvalidParameter(
                "Brusselator constants must be finite, alpha >= 0".into(),
            ));
        }
        Ok(())
    }

    /// `u(0, x, y) = 0.5 + y`, `v(0, x, y) = 1 + 5x` sampled at the nodes.
    pub fn initial_state(&self) -> Vec<f64> {
        let p = self.p;
        let h = self.spacing();
        let mut y = vec![0.0; self.dim()];
        let (u, v) = y.split_at_mut(p * p);
        for iy in 0..p {
            for ix in 0..p {
                u[iy * p + ix] = 0.5 + iy as f64 * h;
                v[iy * p + ix] = 1.0 + 5.0 * ix as f64 * h;
            }
        }
        y
    }

    /// Fine model with the same equations on the nested coarse grid as the
    /// surrogate, coupled by 2D injection/bilinear prolongation.
    pub fn model_pair(&self, coarse_p: usize) -> Result<ModelPair, ProblemError> {
        let (coarse, projection) = brusselator_coarse_surrogate(self, coarse_p)?;
        Ok(ModelPair::new(
            Arc::new(Brusselator::new(*self)?),
            Arc::new(coarse),
            Arc::new(projection),
        )?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Brusselator {
    spec: BrusselatorSpec,
}

impl Brusselator {
    pub fn new(spec: BrusselatorSpec) -> Result<Self, ProblemError> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &BrusselatorSpec {
        &self.spec
    }
}

impl Rhs for Brusselator {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        brusselator_rhs(&self.spec, y, dydt);
    }
}

/// Neumann Laplacian of one field, scaled by `coef / h²`, written to `out`.
pub(crate) fn neumann_laplacian(p: usize, coef: f64, u: &[f64], out: &mut [f64]) {
    let h = 1.0 / (p - 1) as f64;
    let s = coef / (h * h);
    let last = p - 1;
    for iy in 0..p {
        let down = if iy == 0 { 1 } else { iy - 1 };
        let up = if iy == last { last - 1 } else { iy + 1 };
        for ix in 0..p {
            let left = if ix == 0 { 1 } else { ix - 1 };
            let right = if ix == last { last - 1 } else { ix + 1 };
            let c = u[iy * p + ix];
            out[iy * p + ix] = s
                * (u[iy * p + left] + u[iy * p + right] + u[down * p + ix] + u[up * p + ix]
                    - 4.0 * c);
        }
    }
}

/// `u' = α∆u + 1 + u²v − (B+1)u`, `v' = α∆v + B u − u²v`.
pub fn brusselator_rhs(spec: &BrusselatorSpec, y: &[f64], dydt: &mut [f64]) {
    let n = spec.p * spec.p;
    let (u, v) = y.split_at(n);
    let (du, dv) = dydt.split_at_mut(n);
    neumann_laplacian(spec.p, spec.alpha, u, du);
    neumann_laplacian(spec.p, spec.alpha, v, dv);
    for i in 0..n {
        let uuv = u[i] * u[i] * v[i];
        du[i] += 1.0 + uuv - spec.decay * u[i];
        dv[i] += spec.conversion * u[i] - uuv;
    }
}

/// The same discretization on the grid of `coarse_p` points per side, with
/// the projection between the two grids.
pub fn brusselator_coarse_surrogate(
    spec: &BrusselatorSpec,
    coarse_p: usize,
) -> Result<(Brusselator, ProjectionPair), ProblemError> {
    spec.validate()?;
    let nested = coarse_size(spec.p)?;
    if nested != coarse_p {
        return Err(ProblemError::InvalidParameter(format!(
            "coarse grid {coarse_p} does not nest in fine grid {} (expected {nested})",
            spec.p
        )));
    }
    let coarse = Brusselator::new(BrusselatorSpec {
        p: coarse_p,
        ..*spec
    })?;
    Ok((coarse, ProjectionPair::nested_mesh_2d(spec.p, 2)?))
}
