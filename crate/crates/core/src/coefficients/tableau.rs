//! Explicit Runge–Kutta Butcher tableaus.

use num_rational::Rational64;

use super::{ratio_to_f64, Diagnostic, Identity, SchemeError, IDENTITY_TOL};

/// An explicit Runge–Kutta method `(A, b, c)` with its classical order.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    name: String,
    stages: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    order: u32,
}

impl RkTableau {
    /// Builds an explicit tableau. `a` is given row by row.
    ///
    /// Only shape and explicitness are enforced here; the consistency
    /// identities are reported by [`RkTableau::check`].
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        order: u32,
    ) -> Result<Self, SchemeError> {
        let s = b.len();
        if s == 0 {
            return Err(SchemeError::DimensionMismatch {
                what: "tableau weights",
                expected: 1,
                found: 0,
            });
        }
        if c.len() != s {
            return Err(SchemeError::DimensionMismatch {
                what: "tableau abscissae",
                expected: s,
                found: c.len(),
            });
        }
        if a.len() != s {
            return Err(SchemeError::DimensionMismatch {
                what: "tableau rows",
                expected: s,
                found: a.len(),
            });
        }
        let mut flat = Vec::with_capacity(s * s);
        for (i, row) in a.iter().enumerate() {
            if row.len() != s {
                return Err(SchemeError::DimensionMismatch {
                    what: "tableau row length",
                    expected: s,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if j >= i && v != 0.0 {
                    return Err(SchemeError::NotExplicit { row: i, col: j });
                }
            }
            flat.extend_from_slice(row);
        }
        if order == 0 {
            return Err(SchemeError::InvalidOrder(order));
        }
        let all = flat.iter().chain(&b).chain(&c);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(SchemeError::NonFinite);
        }
        Ok(Self {
            name: name.into(),
            stages: s,
            a: flat,
            b,
            c,
            order,
        })
    }

    pub(crate) fn from_exact(
        name: &str,
        a: &[Vec<Rational64>],
        b: &[Rational64],
        c: &[Rational64],
        order: u32,
    ) -> Result<Self, SchemeError> {
        let conv = |v: &[Rational64]| v.iter().map(ratio_to_f64).collect::<Vec<_>>();
        Self::new(
            name,
            a.iter().map(|row| conv(row)).collect(),
            conv(b),
            conv(c),
            order,
        )
    }

    /// Forward Euler.
    pub fn forward_euler() -> Self {
        Self::new("euler", vec![vec![0.0]], vec![1.0], vec![0.0], 1).unwrap()
    }

    /// Ralston's second order method, `c = (0, 2/3)`, `b = (1/4, 3/4)`.
    pub fn ralston2() -> Self {
        let t = exact_ralston2();
        Self::from_exact("ralston2", &t.0, &t.1, &t.2, 2).unwrap()
    }

    /// Ralston's third order method, `c = (0, 1/2, 3/4)`, `b = (2/9, 1/3, 4/9)`.
    pub fn ralston3() -> Self {
        let t = exact_ralston3();
        Self::from_exact("ralston3", &t.0, &t.1, &t.2, 3).unwrap()
    }

    /// The classical fourth order method.
    pub fn classic_rk4() -> Self {
        Self::new(
            "rk4",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
            4,
        )
        .unwrap()
    }

    /// The built-in method of the requested order (1 through 4).
    pub fn with_order(order: u32) -> Result<Self, SchemeError> {
        match order {
            1 => Ok(Self::forward_euler()),
            2 => Ok(Self::ralston2()),
            3 => Ok(Self::ralston3()),
            4 => Ok(Self::classic_rk4()),
            other => Err(SchemeError::InvalidOrder(other)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stages + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Reports violations of `Σ b = 1` and `c_i = Σ_j a_ij`.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let sum_b: f64 = self.b.iter().sum();
        if (sum_b - 1.0).abs() > IDENTITY_TOL {
            out.push(Diagnostic::numeric(Identity::WeightSum, 0, None, sum_b - 1.0));
        }
        for i in 0..self.stages {
            let row: f64 = (0..self.stages).map(|j| self.a(i, j)).sum();
            let r = row - self.c[i];
            if r.abs() > IDENTITY_TOL {
                out.push(Diagnostic::numeric(Identity::RowSum, i, None, r));
            }
        }
        out
    }
}

type ExactTableau = (Vec<Vec<Rational64>>, Vec<Rational64>, Vec<Rational64>);

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

pub(crate) fn exact_euler() -> ExactTableau {
    (vec![vec![q(0, 1)]], vec![q(1, 1)], vec![q(0, 1)])
}

pub(crate) fn exact_ralston2() -> ExactTableau {
    (
        vec![vec![q(0, 1), q(0, 1)], vec![q(2, 3), q(0, 1)]],
        vec![q(1, 4), q(3, 4)],
        vec![q(0, 1), q(2, 3)],
    )
}

pub(crate) fn exact_ralston3() -> ExactTableau {
    let z = q(0, 1);
    (
        vec![
            vec![z, z, z],
            vec![q(1, 2), z, z],
            vec![z, q(3, 4), z],
        ],
        vec![q(2, 9), q(1, 3), q(4, 9)],
        vec![z, q(1, 2), q(3, 4)],
    )
}
