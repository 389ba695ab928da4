use crate::coefficients::RkTableau;

use super::{all_finite, axpy, IntegrationError};

/// One explicit Runge–Kutta step `y + h Σ b_j k_j`, using exactly `s`
/// evaluations of `rhs`.
pub fn rk_step(
    tableau: &RkTableau,
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    t: f64,
    y: &[f64],
    h: f64,
) -> Result<Vec<f64>, IntegrationError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(IntegrationError::InvalidStepSize(h));
    }
    let s = tableau.stages();
    let n = y.len();
    let mut k = vec![vec![0.0; n]; s];
    let mut stage = vec![0.0; n];
    for i in 0..s {
        stage.copy_from_slice(y);
        for j in 0..i {
            let a = tableau.a(i, j);
            if a != 0.0 {
                axpy(h * a, &k[j], &mut stage);
            }
        }
        let ti = t + tableau.c()[i] * h;
        rhs(ti, &stage, &mut k[i]);
        if !all_finite(&k[i]) {
            return Err(IntegrationError::NonFiniteRhs { t: ti, stage: i });
        }
    }
    let mut out = y.to_vec();
    for (kj, &bj) in k.iter().zip(tableau.b()) {
        if bj != 0.0 {
            axpy(h * bj, kj, &mut out);
        }
    }
    Ok(out)
}
