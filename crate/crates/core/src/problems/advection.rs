//! Molenkamp–Crowley solid-body rotation, first-order upwind differences.
//!
//! Same grid layout as the Brusselator, one field. The velocity
//! `a(x, y) = 2π(y − ½, −(x − ½))` turns the domain clockwise once per unit
//! time. Boundary nodes carry zero Dirichlet data and a zero tendency.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::integrators::{ModelPair, Rhs};
use crate::projections::{coarse_size, ProjectionPair};

use super::ProblemError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectionSpec {
    pub p: usize,
    pub t_end: f64,
}

impl Default for AdvectionSpec {
    fn default() -> Self {
        Self { p: 101, t_end: 2.0 }
    }
}

pub fn velocity(x: f64, y: f64) -> (f64, f64) {
    (2.0 * PI * (y - 0.5), -2.0 * PI * (x - 0.5))
}

impl AdvectionSpec {
    pub fn with_p(p: usize) -> Self {
        Self {
            p,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.p * self.p
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.p - 1) as f64
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.p < 3 {
            return Err(ProblemError::InvalidParameter(format!(
                "advection grid needs P >= 3, got {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `exp(−100((x − 0.35)² + (y − 0.35)²))`, zero on the boundary.
    pub fn initial_state(&self) -> Vec<f64> {
        let p = self.p;
        let h = self.spacing();
        let mut u = vec![0.0; p * p];
        for iy in 1..p - 1 {
            for ix in 1..p - 1 {
                let (x, y) = (ix as f64 * h, iy as f64 * h);
                u[iy * p + ix] = (-100.0 * ((x - 0.35).powi(2) + (y - 0.35).powi(2))).exp();
            }
        }
        u
    }

    pub fn model_pair(&self, coarse_p: usize) -> Result<ModelPair, ProblemError> {
        self.validate()?;
        let nested = coarse_size(self.p)?;
        if nested != coarse_p {
            return Err(ProblemError::InvalidParameter(format!(
                "coarse grid {coarse_p} does not nest in fine grid {} (expected {nested})",
                self.p
            )));
        }
        let coarse = Advection::new(AdvectionSpec {
            p: coarse_p,
            ..*self
        })?;
        Ok(ModelPair::new(
            Arc::new(Advection::new(*self)?),
            Arc::new(coarse),
            Arc::new(ProjectionPair::nested_mesh_2d(self.p, 1)?),
        )?)
    }
}

/// Upwind discretization with the velocity precomputed per node.
#[derive(Debug, Clone)]
pub struct Advection {
    spec: AdvectionSpec,
    ax: Vec<f64>,
    ay: Vec<f64>,
}

impl Advection {
    pub fn new(spec: AdvectionSpec) -> Result<Self, ProblemError> {
        spec.validate()?;
        let p = spec.p;
        let h = spec.spacing();
        let mut ax = vec![0.0; p * p];
        let mut ay = vec![0.0; p * p];
        for iy in 0..p {
            for ix in 0..p {
                let (a, b) = velocity(ix as f64 * h, iy as f64 * h);
                ax[iy * p + ix] = a;
                ay[iy * p + ix] = b;
            }
        }
        Ok(Self { spec, ax, ay })
    }

    pub fn spec(&self) -> &AdvectionSpec {
        &self.spec
    }

    /// Largest stable forward Euler step, `h / max(|a_x| + |a_y|)`.
    pub fn cfl_step(&self) -> f64 {
        let m = self
            .ax
            .iter()
            .zip(&self.ay)
            .map(|(a, b)| a.abs() + b.abs())
            .fold(0.0, f64::max);
        self.spec.spacing() / m
    }
}

impl Rhs for Advection {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn eval(&self, _t: f64, u: &[f64], dudt: &mut [f64]) {
        let p = self.spec.p;
        let inv_h = 1.0 / self.spec.spacing();
        dudt.iter_mut().for_each(|v| *v = 0.0);
        for iy in 1..p - 1 {
            for ix in 1..p - 1 {
                let i = iy * p + ix;
                let (a, b) = (self.ax[i], self.ay[i]);
                let dx = if a > 0.0 { u[i] - u[i - 1] } else { u[i + 1] - u[i] };
                let dy = if b > 0.0 { u[i] - u[i - p] } else { u[i + p] - u[i] };
                dudt[i] = -(a * dx + b * dy) * inv_h;
            }
        }
    }
}
