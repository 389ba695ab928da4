//! Runge–Kutta tableaus and the polynomial couplings of multirate
//! infinitesimal schemes.
//!
//! A [`CouplingScheme`] pairs a base explicit tableau with coupling
//! polynomials: a matrix `Γ(τ)` for decoupled MRI-GARK schemes, one
//! row per slow stage, or a vector `γ(τ)` for step predictor-corrector
//! schemes. Both are stored as [`PolynomialMatrix`] values, the latter with a
//! single column.
//!
//! Built-in schemes keep their exact rational coefficients next to the
//! floating point copies, so [`validate_scheme`] can check the consistency
//! identities symbolically as well as at sampled `τ`.

pub mod catalog;
mod polynomial;
mod scheme_file;
mod tableau;

use std::fmt;
use std::path::PathBuf;

use num_rational::Rational64;
use thiserror::Error;

pub use catalog::{builtin_schemes, euler, euler_spc, ralston2_mri, ralston2_spc, ralston3_mri,
    ralston3_spc};
pub use polynomial::{horner, PolynomialMatrix};
pub use scheme_file::{load_scheme_file, parse_scheme};
pub use tableau::RkTableau;

/// Absolute tolerance for the floating point identity checks.
pub const IDENTITY_TOL: f64 = 1e-13;

/// The `τ` values at which the identities are sampled.
pub const SAMPLE_TAUS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("{what}: expected {expected} entries, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("tableau entry ({row}, {col}) is on or above the diagonal; only explicit methods are supported")]
    NotExplicit { row: usize, col: usize },
    #[error("coupling entry ({row}, {col}) of degree {degree} lies above the diagonal; implicit couplings are not supported")]
    ImplicitCoupling {
        row: usize,
        col: usize,
        degree: usize,
    },
    #[error("coupling polynomial has no coefficients")]
    EmptyCoupling,
    #[error("unsupported method order {0}")]
    InvalidOrder(u32),
    #[error("scheme coefficients must be finite")]
    NonFinite,
    #[error("tau = {0} lies outside [0, 1]")]
    TauOutOfRange(f64),
    #[error("scheme file: {0}")]
    Parse(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// How the coupling polynomials feed slow tendencies into the fast ODEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// One modified fast ODE per slow stage, coupled through `Γ(τ)`.
    DecoupledMri,
    /// Full Runge–Kutta predictor followed by a single corrector ODE, coupled
    /// through `γ(τ)`.
    StepPredictorCorrector,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeKind::DecoupledMri => f.write_str("mri"),
            SchemeKind::StepPredictorCorrector => f.write_str("spc"),
        }
    }
}

/// Which identity a [`Diagnostic`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `Σ_j b_j = 1`.
    WeightSum,
    /// `c_i = Σ_j a_ij`.
    RowSum,
    /// `Σ_j Γ_ij(τ) = Δc_i` (decoupled MRI).
    InternalConsistency,
    /// `Σ_i Γ̄_ij = b_j` (decoupled MRI).
    GammaBarColumnSum,
    /// `Σ_j γ_j(τ) = 1` (step predictor-corrector).
    PartitionOfUnity,
    /// `γ̄_j = b_j` (step predictor-corrector).
    GammaBarWeights,
}

/// One violated identity with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub identity: Identity,
    /// Stage, row or column the identity was checked for.
    pub index: usize,
    /// Sample point, when the check was made at a specific `τ`.
    pub tau: Option<f64>,
    pub residual: f64,
    /// `true` when found by exact coefficient arithmetic.
    pub symbolic: bool,
}

impl Diagnostic {
    pub(crate) fn numeric(identity: Identity, index: usize, tau: Option<f64>, residual: f64) -> Self {
        Self {
            identity,
            index,
            tau,
            residual,
            symbolic: false,
        }
    }

    fn symbolic(identity: Identity, index: usize, residual: Rational64) -> Self {
        Self {
            identity,
            index,
            tau: None,
            residual: ratio_to_f64(&residual),
            symbolic: true,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}[{}]", self.identity, self.index)?;
        if let Some(tau) = self.tau {
            write!(f, " at tau={tau}")?;
        }
        if self.symbolic {
            write!(f, " (exact)")?;
        }
        write!(f, ": residual {:e}", self.residual)
    }
}

/// Exact rational copy of a scheme's coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCoefficients {
    pub a: Vec<Vec<Rational64>>,
    pub b: Vec<Rational64>,
    pub c: Vec<Rational64>,
    pub coupling: PolynomialMatrix<Rational64>,
}

/// A base tableau together with its multirate coupling polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingScheme {
    name: String,
    tableau: RkTableau,
    kind: SchemeKind,
    coupling: PolynomialMatrix<f64>,
    delta_c: Vec<f64>,
    exact: Option<ExactCoefficients>,
}

impl CouplingScheme {
    /// Builds a scheme from floating point coefficients.
    ///
    /// The coupling must be `s × s` and lower triangular in every degree for
    /// [`SchemeKind::DecoupledMri`], and `s × 1` for
    /// [`SchemeKind::StepPredictorCorrector`].
    pub fn new(
        name: impl Into<String>,
        tableau: RkTableau,
        kind: SchemeKind,
        coupling: PolynomialMatrix<f64>,
    ) -> Result<Self, SchemeError> {
        let s = tableau.stages();
        check_coupling_shape(s, kind, coupling.rows(), coupling.cols())?;
        if coupling.coefficients().iter().flatten().any(|v| !v.is_finite()) {
            return Err(SchemeError::NonFinite);
        }
        if kind == SchemeKind::DecoupledMri {
            for (k, ck) in coupling.coefficients().iter().enumerate() {
                for i in 0..s {
                    for j in (i + 1)..s {
                        if ck[i * s + j] != 0.0 {
                            return Err(SchemeError::ImplicitCoupling {
                                row: i,
                                col: j,
                                degree: k,
                            });
                        }
                    }
                }
            }
        }
        let c = tableau.c();
        let delta_c = (0..s)
            .map(|i| if i + 1 < s { c[i + 1] - c[i] } else { 1.0 - c[i] })
            .collect();
        Ok(Self {
            name: name.into(),
            tableau,
            kind,
            coupling,
            delta_c,
            exact: None,
        })
    }

    /// Builds a scheme from exact rational coefficients, converting each to
    /// floating point once.
    pub fn from_exact(
        name: impl Into<String>,
        kind: SchemeKind,
        order: u32,
        exact: ExactCoefficients,
    ) -> Result<Self, SchemeError> {
        let name = name.into();
        let tableau = RkTableau::from_exact(&name, &exact.a, &exact.b, &exact.c, order)?;
        let coupling = exact.coupling.map(ratio_to_f64);
        let mut scheme = Self::new(name, tableau, kind, coupling)?;
        let s = exact.c.len();
        scheme.delta_c = (0..s)
            .map(|i| {
                let next = if i + 1 < s { exact.c[i + 1] } else { Rational64::from_integer(1) };
                ratio_to_f64(&(next - exact.c[i]))
            })
            .collect();
        scheme.exact = Some(exact);
        Ok(scheme)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tableau(&self) -> &RkTableau {
        &self.tableau
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn stages(&self) -> usize {
        self.tableau.stages()
    }

    pub fn order(&self) -> u32 {
        self.tableau.order()
    }

    pub fn coupling(&self) -> &PolynomialMatrix<f64> {
        &self.coupling
    }

    /// Abscissa gaps `Δc_i = c_{i+1} − c_i`, with `Δc_s = 1 − c_s`.
    pub fn delta_c(&self) -> &[f64] {
        &self.delta_c
    }

    pub fn exact(&self) -> Option<&ExactCoefficients> {
        self.exact.as_ref()
    }

    /// `Γ(τ)` (row-major `s × s`) or `γ(τ)` (length `s`).
    pub fn eval_coupling(&self, tau: f64) -> Result<Vec<f64>, SchemeError> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(SchemeError::TauOutOfRange(tau));
        }
        Ok(self.coupling.eval(tau))
    }

    /// `Γ̄` (row-major `s × s`) or `γ̄` (length `s`).
    pub fn gamma_bar(&self) -> Vec<f64> {
        self.coupling.integral()
    }

    /// Lists every violated identity. Empty means the scheme is consistent.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.tableau.check();
        let s = self.stages();
        let b = self.tableau.b();
        let gbar = self.gamma_bar();
        match self.kind {
            SchemeKind::DecoupledMri => {
                for &tau in &SAMPLE_TAUS {
                    let g = self.coupling.eval(tau);
                    for i in 0..s {
                        let row: f64 = g[i * s..(i + 1) * s].iter().sum();
                        let r = row - self.delta_c[i];
                        if r.abs() > IDENTITY_TOL {
                            out.push(Diagnostic::numeric(
                                Identity::InternalConsistency,
                                i,
                                Some(tau),
                                r,
                            ));
                        }
                    }
                }
                for j in 0..s {
                    let col: f64 = (0..s).map(|i| gbar[i * s + j]).sum();
                    let r = col - b[j];
                    if r.abs() > IDENTITY_TOL {
                        out.push(Diagnostic::numeric(Identity::GammaBarColumnSum, j, None, r));
                    }
                }
            }
            SchemeKind::StepPredictorCorrector => {
                for &tau in &SAMPLE_TAUS {
                    let r = self.coupling.eval(tau).iter().sum::<f64>() - 1.0;
                    if r.abs() > IDENTITY_TOL {
                        out.push(Diagnostic::numeric(Identity::PartitionOfUnity, 0, Some(tau), r));
                    }
                }
                for j in 0..s {
                    let r = gbar[j] - b[j];
                    if r.abs() > IDENTITY_TOL {
                        out.push(Diagnostic::numeric(Identity::GammaBarWeights, j, None, r));
                    }
                }
            }
        }
        if let Some(exact) = &self.exact {
            out.extend(validate_exact(self.kind, exact));
        }
        out
    }
}

/// Coefficient-level checks; every residual must vanish exactly.
fn validate_exact(kind: SchemeKind, exact: &ExactCoefficients) -> Vec<Diagnostic> {
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    let s = exact.b.len();
    let mut out = Vec::new();

    let sum_b: Rational64 = exact.b.iter().sum();
    if sum_b != one {
        out.push(Diagnostic::symbolic(Identity::WeightSum, 0, sum_b - one));
    }
    for i in 0..s {
        let row: Rational64 = exact.a[i].iter().sum();
        if row != exact.c[i] {
            out.push(Diagnostic::symbolic(Identity::RowSum, i, row - exact.c[i]));
        }
    }

    let coeffs = exact.coupling.coefficients();
    let gbar = exact.coupling.integral();
    match kind {
        SchemeKind::DecoupledMri => {
            for i in 0..s {
                let next = if i + 1 < s { exact.c[i + 1] } else { one };
                let dc = next - exact.c[i];
                // Degree-0 row sums carry Δc; all higher degrees must cancel.
                for (k, ck) in coeffs.iter().enumerate() {
                    let row: Rational64 = ck[i * s..(i + 1) * s].iter().sum();
                    let target = if k == 0 { dc } else { zero };
                    if row != target {
                        out.push(Diagnostic::symbolic(Identity::InternalConsistency, i, row - target));
                    }
                }
            }
            for j in 0..s {
                let col: Rational64 = (0..s).map(|i| gbar[i * s + j]).sum();
                if col != exact.b[j] {
                    out.push(Diagnostic::symbolic(Identity::GammaBarColumnSum, j, col - exact.b[j]));
                }
            }
        }
        SchemeKind::StepPredictorCorrector => {
            for (k, ck) in coeffs.iter().enumerate() {
                let sum: Rational64 = ck.iter().sum();
                let target = if k == 0 { one } else { zero };
                if sum != target {
                    out.push(Diagnostic::symbolic(Identity::PartitionOfUnity, k, sum - target));
                }
            }
            for j in 0..s {
                if gbar[j] != exact.b[j] {
                    out.push(Diagnostic::symbolic(Identity::GammaBarWeights, j, gbar[j] - exact.b[j]));
                }
            }
        }
    }
    out
}

fn check_coupling_shape(
    s: usize,
    kind: SchemeKind,
    rows: usize,
    cols: usize,
) -> Result<(), SchemeError> {
    let expected_cols = match kind {
        SchemeKind::DecoupledMri => s,
        SchemeKind::StepPredictorCorrector => 1,
    };
    if rows != s {
        return Err(SchemeError::DimensionMismatch {
            what: "coupling rows",
            expected: s,
            found: rows,
        });
    }
    if cols != expected_cols {
        return Err(SchemeError::DimensionMismatch {
            what: "coupling columns",
            expected: expected_cols,
            found: cols,
        });
    }
    Ok(())
}

/// Correctly rounded for the small numerators and denominators used here.
pub fn ratio_to_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `Γ(τ)` or `γ(τ)`; rejects `τ` outside `[0, 1]`.
pub fn eval_coupling(scheme: &CouplingScheme, tau: f64) -> Result<Vec<f64>, SchemeError> {
    scheme.eval_coupling(tau)
}

/// `Γ̄` or `γ̄`.
pub fn gamma_bar(scheme: &CouplingScheme) -> Vec<f64> {
    scheme.gamma_bar()
}

/// Violated identities of `scheme`; empty when consistent.
pub fn validate_scheme(scheme: &CouplingScheme) -> Vec<Diagnostic> {
    scheme.validate()
}
