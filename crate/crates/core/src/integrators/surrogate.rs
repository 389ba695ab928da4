//! Surrogate-model MRI-GARK and SPC-MRI-GARK macro steps.
//!
//! Both steppers split the update into the surrogate space, where the
//! forced surrogate ODE is micro-stepped, and its complement, where the
//! update reduces to a Runge–Kutta combination of full-model tendencies.
//! `y_hat` carries `W* y` between stages; `ŵ` is what `y_hat` would become
//! under the pure Runge–Kutta update, so `V(ŷ_new − ŵ)` swaps the surrogate
//! space component of `y` for the micro-stepped one.

use crate::coefficients::{CouplingScheme, SchemeKind};

use super::inner::{inner_solve, ForcingTerm, InnerSolverConfig};
use super::model::ModelPair;
use super::{all_finite, axpy, check_state, IntegrationError, StepState};

/// One macro step of a decoupled MRI-GARK scheme applied to the
/// full/surrogate splitting.
///
/// Costs `s` full-model evaluations and `s·m·s_inner` surrogate evaluations:
/// the surrogate evaluation at `(T_i, ŷ)` used for `ℓ̂_i` doubles as the first
/// stage of the stage-`i` inner solve.
pub fn sm_mri_gark_step(
    scheme: &CouplingScheme,
    inner: &InnerSolverConfig,
    models: &ModelPair,
    state: &StepState,
    h: f64,
) -> Result<StepState, IntegrationError> {
    if scheme.kind() != SchemeKind::DecoupledMri {
        return Err(IntegrationError::WrongSchemeKind {
            expected: SchemeKind::DecoupledMri,
            found: scheme.kind(),
        });
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(IntegrationError::InvalidStepSize(h));
    }
    check_state(models, state)?;

    let s = scheme.stages();
    let (n, ns) = (models.dim_full(), models.dim_surrogate());
    let proj = models.projection();
    let c = scheme.tableau().c();
    let dc = scheme.delta_c();
    let gbar = scheme.gamma_bar();
    let coupling = scheme.coupling();

    let mut y = state.y.clone();
    let mut y_hat = state.y_hat.clone();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut k_hat: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut l_hat: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut fs0 = vec![0.0; ns];

    for i in 0..s {
        let ti = state.t + c[i] * h;
        let mut ki = vec![0.0; n];
        models.eval_full(ti, &y, &mut ki);
        if !all_finite(&ki) {
            return Err(IntegrationError::NonFiniteRhs { t: ti, stage: i });
        }
        let ki_hat = proj.restrict(&ki);
        models.eval_surrogate(ti, &y_hat, &mut fs0);
        if !all_finite(&fs0) {
            return Err(IntegrationError::NonFiniteSurrogate { t: ti, stage: i });
        }
        let li: Vec<f64> = ki_hat.iter().zip(&fs0).map(|(a, b)| a - b).collect();
        k.push(ki);
        k_hat.push(ki_hat);
        l_hat.push(li);

        let mut w_hat = y_hat.clone();
        for j in 0..=i {
            let g = gbar[i * s + j];
            if g != 0.0 {
                axpy(h * g, &k_hat[j], &mut w_hat);
                axpy(h * g, &k[j], &mut y);
            }
        }

        let weights: Vec<Vec<f64>> = (0..=i).map(|j| coupling.entry(i, j)).collect();
        let forcing: Vec<ForcingTerm<'_>> = weights
            .iter()
            .zip(&l_hat)
            .map(|(w, l)| ForcingTerm {
                weight: w,
                direction: l,
            })
            .collect();
        let y_hat_new = inner_solve(
            inner,
            |t, z, out| models.eval_surrogate(t, z, out),
            &forcing,
            dc[i],
            ti,
            h,
            &y_hat,
            Some(&fs0),
        )?;

        let correction: Vec<f64> = y_hat_new.iter().zip(&w_hat).map(|(a, b)| a - b).collect();
        proj.lift_add(&correction, &mut y);
        y_hat = y_hat_new;
    }

    Ok(StepState {
        t: state.t + h,
        y,
        y_hat,
    })
}

/// One macro step of a step predictor-corrector scheme applied to the
/// full/surrogate splitting.
///
/// Costs `s` full-model evaluations, `s` surrogate evaluations for the
/// `ℓ̂_i`, one inner solve of `m·s_inner` surrogate evaluations, and a single
/// lift.
pub fn sm_spc_mri_gark_step(
    scheme: &CouplingScheme,
    inner: &InnerSolverConfig,
    models: &ModelPair,
    state: &StepState,
    h: f64,
) -> Result<StepState, IntegrationError> {
    if scheme.kind() != SchemeKind::StepPredictorCorrector {
        return Err(IntegrationError::WrongSchemeKind {
            expected: SchemeKind::StepPredictorCorrector,
            found: scheme.kind(),
        });
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(IntegrationError::InvalidStepSize(h));
    }
    check_state(models, state)?;

    let tab = scheme.tableau();
    let s = tab.stages();
    let (n, ns) = (models.dim_full(), models.dim_surrogate());
    let proj = models.projection();

    let mut k: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut k_hat: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut l_hat: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut stage = vec![0.0; n];
    let mut stage_hat = vec![0.0; ns];
    let mut fs = vec![0.0; ns];

    for i in 0..s {
        stage.copy_from_slice(&state.y);
        stage_hat.copy_from_slice(&state.y_hat);
        for j in 0..i {
            let a = tab.a(i, j);
            if a != 0.0 {
                axpy(h * a, &k[j], &mut stage);
                axpy(h * a, &k_hat[j], &mut stage_hat);
            }
        }
        let ti = state.t + tab.c()[i] * h;
        let mut ki = vec![0.0; n];
        models.eval_full(ti, &stage, &mut ki);
        if !all_finite(&ki) {
            return Err(IntegrationError::NonFiniteRhs { t: ti, stage: i });
        }
        let ki_hat = proj.restrict(&ki);
        models.eval_surrogate(ti, &stage_hat, &mut fs);
        if !all_finite(&fs) {
            return Err(IntegrationError::NonFiniteSurrogate { t: ti, stage: i });
        }
        l_hat.push(ki_hat.iter().zip(&fs).map(|(a, b)| a - b).collect());
        k.push(ki);
        k_hat.push(ki_hat);
    }

    let mut y = state.y.clone();
    let mut w_hat = state.y_hat.clone();
    for j in 0..s {
        let b = tab.b()[j];
        if b != 0.0 {
            axpy(h * b, &k_hat[j], &mut w_hat);
            axpy(h * b, &k[j], &mut y);
        }
    }

    let coupling = scheme.coupling();
    let weights: Vec<Vec<f64>> = (0..s).map(|j| coupling.entry(j, 0)).collect();
    let forcing: Vec<ForcingTerm<'_>> = weights
        .iter()
        .zip(&l_hat)
        .map(|(w, l)| ForcingTerm {
            weight: w,
            direction: l,
        })
        .collect();
    let y_hat = inner_solve(
        inner,
        |t, z, out| models.eval_surrogate(t, z, out),
        &forcing,
        1.0,
        state.t,
        h,
        &state.y_hat,
        None,
    )?;

    let correction: Vec<f64> = y_hat.iter().zip(&w_hat).map(|(a, b)| a - b).collect();
    proj.lift_add(&correction, &mut y);

    Ok(StepState {
        t: state.t + h,
        y,
        y_hat,
    })
}
