//! Linear fixtures `y' = M y` with the scalar surrogate `z' = μ z`.

use std::sync::Arc;

use crate::integrators::{ModelPair, Rhs};
use crate::projections::ProjectionPair;

use super::ProblemError;

/// `y' = M y` for a dense row-major `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRhs {
    n: usize,
    m: Vec<f64>,
}

impl LinearRhs {
    pub fn new(n: usize, m: Vec<f64>) -> Result<Self, ProblemError> {
        if n == 0 || m.len() != n * n {
            return Err(ProblemError::InvalidParameter(format!(
                "expected a {n}×{n} matrix, got {} entries",
                m.len()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidParameter("matrix has non-finite entries".into()));
        }
        Ok(Self { n, m })
    }

    pub fn matrix(&self) -> &[f64] {
        &self.m
    }
}

impl Rhs for LinearRhs {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        for (row, out) in self.m.chunks_exact(self.n).zip(dydt.iter_mut()) {
            *out = row.iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }
}

/// `z' = μ z`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarRhs {
    pub n: usize,
    pub mu: f64,
}

impl Rhs for ScalarRhs {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, _t: f64, z: &[f64], dzdt: &mut [f64]) {
        for (o, v) in dzdt.iter_mut().zip(z) {
            *o = self.mu * v;
        }
    }
}

/// Full model `M y`, surrogate `μ z`, identity projection.
pub fn linear_test_problem(n: usize, m: Vec<f64>, mu: f64) -> Result<ModelPair, ProblemError> {
    let full = LinearRhs::new(n, m)?;
    Ok(ModelPair::new(
        Arc::new(full),
        Arc::new(ScalarRhs { n, mu }),
        Arc::new(ProjectionPair::identity(n)?),
    )?)
}

/// `[[0, 1], [−1, 0]]`: `y0 = (1, 0)` traces `(cos t, −sin t)`.
pub fn rotation_matrix() -> Vec<f64> {
    vec![0.0, 1.0, -1.0, 0.0]
}

fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// `exp(t M) y0` by scaling and squaring of a truncated Taylor series.
pub fn expm_apply(n: usize, m: &[f64], t: f64, y0: &[f64]) -> Vec<f64> {
    let norm = m
        .chunks_exact(n)
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    // Scale so the series argument has norm ≤ 1/8, where 20 terms reach roundoff.
    let squarings = if norm > 0.125 {
        (norm / 0.125).log2().ceil() as u32
    } else {
        0
    };
    let scale = t / 2f64.powi(squarings as i32);
    let a: Vec<f64> = m.iter().map(|v| v * scale).collect();

    let mut e = vec![0.0; n * n];
    let mut term = vec![0.0; n * n];
    for i in 0..n {
        e[i * n + i] = 1.0;
        term[i * n + i] = 1.0;
    }
    for k in 1..=20 {
        term = matmul(n, &term, &a);
        term.iter_mut().for_each(|v| *v /= k as f64);
        e.iter_mut().zip(&term).for_each(|(x, y)| *x += y);
    }
    for _ in 0..squarings {
        e = matmul(n, &e, &e);
    }
    e.chunks_exact(n)
        .map(|r| r.iter().zip(y0).map(|(a, b)| a * b).sum())
        .collect()
}
