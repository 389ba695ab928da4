//! Built-in schemes: Euler and the Ralston-based second and third order
//! MRI-GARK and SPC-MRI-GARK couplings.

use num_rational::Rational64;

use super::tableau::{exact_euler, exact_ralston2, exact_ralston3};
use super::{CouplingScheme, ExactCoefficients, PolynomialMatrix, SchemeKind};

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn build(
    name: &str,
    kind: SchemeKind,
    order: u32,
    tableau: (Vec<Vec<Rational64>>, Vec<Rational64>, Vec<Rational64>),
    cols: usize,
    coupling: Vec<Vec<Rational64>>,
) -> CouplingScheme {
    let s = tableau.1.len();
    let coupling = PolynomialMatrix::new(s, cols, coupling).expect("built-in coupling shape");
    let exact = ExactCoefficients {
        a: tableau.0,
        b: tableau.1,
        c: tableau.2,
        coupling,
    };
    CouplingScheme::from_exact(name, kind, order, exact).expect("built-in scheme is well formed")
}

/// Forward Euler with `γ_11(t) = 1`. The same coefficients form both a
/// decoupled MRI and a step predictor-corrector scheme; this is the MRI form.
pub fn euler() -> CouplingScheme {
    build(
        "euler",
        SchemeKind::DecoupledMri,
        1,
        exact_euler(),
        1,
        vec![vec![q(1, 1)]],
    )
}

/// [`euler`] tagged as a step predictor-corrector scheme.
pub fn euler_spc() -> CouplingScheme {
    build(
        "euler-spc",
        SchemeKind::StepPredictorCorrector,
        1,
        exact_euler(),
        1,
        vec![vec![q(1, 1)]],
    )
}

/// Constant coupling `Γ = [[2/3, 0], [−5/12, 3/4]]`.
pub fn ralston2_mri() -> CouplingScheme {
    build(
        "mri-ralston2",
        SchemeKind::DecoupledMri,
        2,
        exact_ralston2(),
        2,
        vec![vec![q(2, 3), q(0, 1), q(-5, 12), q(3, 4)]],
    )
}

/// `γ(t) = (−1/2 + 3t/2, 3/2 − 3t/2)`.
pub fn ralston2_spc() -> CouplingScheme {
    build(
        "spc-ralston2",
        SchemeKind::StepPredictorCorrector,
        2,
        exact_ralston2(),
        1,
        vec![vec![q(-1, 2), q(3, 2)], vec![q(3, 2), q(-3, 2)]],
    )
}

/// Linear-in-`t` lower triangular coupling on Ralston's third order method.
pub fn ralston3_mri() -> CouplingScheme {
    let z = q(0, 1);
    build(
        "mri-ralston3",
        SchemeKind::DecoupledMri,
        3,
        exact_ralston3(),
        3,
        vec![
            vec![
                q(1, 2), z, z, //
                q(-11, 4), q(3, 1), z, //
                q(47, 36), q(-1, 6), q(-8, 9),
            ],
            vec![
                z, z, z, //
                q(9, 2), q(-9, 2), z, //
                q(-13, 6), q(-1, 2), q(8, 3),
            ],
        ],
    )
}

/// Quadratic `γ(t)` on Ralston's third order method.
pub fn ralston3_spc() -> CouplingScheme {
    let z = q(0, 1);
    build(
        "spc-ralston3",
        SchemeKind::StepPredictorCorrector,
        3,
        exact_ralston3(),
        1,
        vec![
            vec![q(1, 1), z, z],
            vec![q(-2, 3), q(-2, 1), q(8, 3)],
            vec![q(-4, 3), q(4, 1), q(-8, 3)],
        ],
    )
}

/// The five shipped schemes: Euler, then MRI and SPC variants of Ralston 2
/// and Ralston 3.
pub fn builtin_schemes() -> Vec<CouplingScheme> {
    vec![
        euler(),
        ralston2_mri(),
        ralston2_spc(),
        ralston3_mri(),
        ralston3_spc(),
    ]
}
