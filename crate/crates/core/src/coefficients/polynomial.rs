//! Matrix-valued polynomials in the normalized macro-step time `τ ∈ [0, 1]`.
//!
//! A [`PolynomialMatrix`] stores the coefficient matrices `Γ^k` of
//! `Γ(τ) = Σ_k Γ^k τ^k`. The same type carries the vector-valued couplings of
//! step predictor-corrector schemes as single-column matrices.

use std::ops::Add;

use num_traits::{FromPrimitive, Num};

use super::SchemeError;

/// Polynomial with matrix coefficients, stored row-major per degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMatrix<T = f64> {
    rows: usize,
    cols: usize,
    coeffs: Vec<Vec<T>>,
}

impl<T: Num + Clone> PolynomialMatrix<T> {
    /// Builds a polynomial from its coefficient matrices, lowest degree first.
    pub fn new(rows: usize, cols: usize, coeffs: Vec<Vec<T>>) -> Result<Self, SchemeError> {
        if coeffs.is_empty() {
            return Err(SchemeError::EmptyCoupling);
        }
        for c in &coeffs {
            if c.len() != rows * cols {
                return Err(SchemeError::DimensionMismatch {
                    what: "coupling coefficient matrix",
                    expected: rows * cols,
                    found: c.len(),
                });
            }
        }
        Ok(Self { rows, cols, coeffs })
    }

    /// The zero polynomial of degree 0.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: vec![vec![T::zero(); rows * cols]],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Nominal degree, i.e. the number of stored coefficient matrices minus one.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient matrix `Γ^k`, row-major.
    pub fn coefficient(&self, k: usize) -> &[T] {
        &self.coeffs[k]
    }

    pub fn coefficients(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    /// Scalar polynomial of entry `(i, j)`, lowest degree first.
    pub fn entry(&self, i: usize, j: usize) -> Vec<T> {
        let idx = i * self.cols + j;
        self.coeffs.iter().map(|c| c[idx].clone()).collect()
    }

    /// Horner evaluation of every entry at `tau`.
    pub fn eval(&self, tau: T) -> Vec<T> {
        let mut out = self.coeffs[self.degree()].clone();
        for c in self.coeffs[..self.degree()].iter().rev() {
            for (o, ck) in out.iter_mut().zip(c) {
                *o = o.clone() * tau.clone() + ck.clone();
            }
        }
        out
    }

    /// Applies `f` to every coefficient, e.g. to convert exact rationals to floats.
    pub fn map<U: Num + Clone>(&self, f: impl Fn(&T) -> U) -> PolynomialMatrix<U> {
        PolynomialMatrix {
            rows: self.rows,
            cols: self.cols,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.iter().map(&f).collect())
                .collect(),
        }
    }
}

impl<T: Num + Clone + FromPrimitive> PolynomialMatrix<T> {
    /// Antiderivative `Γ̃(t) = Σ_k Γ^k t^{k+1} / (k+1)`, vanishing at zero.
    pub fn antiderivative_at(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows * self.cols];
        let mut t_pow = t.clone();
        for (k, c) in self.coeffs.iter().enumerate() {
            let denom = T::from_usize(k + 1).expect("degree fits the scalar type");
            for (o, ck) in out.iter_mut().zip(c) {
                *o = o.clone() + ck.clone() * t_pow.clone() / denom.clone();
            }
            t_pow = t_pow * t.clone();
        }
        out
    }

    /// `Γ̄ = Γ̃(1) = Σ_k Γ^k / (k+1)`.
    pub fn integral(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows * self.cols];
        for (k, c) in self.coeffs.iter().enumerate() {
            let denom = T::from_usize(k + 1).expect("degree fits the scalar type");
            for (o, ck) in out.iter_mut().zip(c) {
                *o = o.clone() + ck.clone() / denom.clone();
            }
        }
        out
    }
}

impl<T: Num + Clone> Add for &PolynomialMatrix<T> {
    type Output = PolynomialMatrix<T>;

    fn add(self, rhs: Self) -> PolynomialMatrix<T> {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "polynomial matrix shapes differ"
        );
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let zero = vec![T::zero(); self.rows * self.cols];
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).unwrap_or(&zero);
                let b = rhs.coeffs.get(k).unwrap_or(&zero);
                a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
            })
            .collect();
        PolynomialMatrix {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
    }
}

/// Horner evaluation of a scalar polynomial given lowest degree first.
pub fn horner(coeffs: &[f64], tau: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * tau + c)
}
