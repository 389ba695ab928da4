use std::sync::Arc;

use proptest::prelude::*;
use smmr_core::coefficients::{builtin_schemes, catalog, RkTableau, SchemeKind};
use smmr_core::integrators::{
    integrate, rk_step, FnRhs, InnerSolverConfig, IntegrateOptions, ModelPair, Rhs, StepState,
    Stepper, ZeroRhs,
};
use smmr_core::problems::{
    expm_apply, linear_test_problem, rotation_matrix, BrusselatorSpec, Lorenz96Spec,
};
use smmr_core::projections::ProjectionPair;

fn lorenz_zero_surrogate() -> ModelPair {
    ModelPair::new(
        Arc::new(Lorenz96Spec::default().full()),
        Arc::new(ZeroRhs(40)),
        Arc::new(ProjectionPair::identity(40).unwrap()),
    )
    .unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den
}

fn sm_stepper(scheme: smmr_core::coefficients::CouplingScheme, m: usize) -> Stepper {
    let inner = InnerSolverConfig::for_scheme(&scheme, m).unwrap();
    Stepper::surrogate_model(scheme, inner).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn zero_surrogate_reduces_to_base_runge_kutta(
        x in prop::collection::vec(-10.0f64..15.0, 40),
        h in 0.001f64..0.05,
        t in 0.0f64..5.0,
    ) {
        let models = lorenz_zero_surrogate();
        let full = Lorenz96Spec::default().full();
        for scheme in builtin_schemes() {
            let expected = rk_step(scheme.tableau(), |t, y, o| full.eval(t, y, o), t, &x, h).unwrap();
            let stepper = sm_stepper(scheme.clone(), 1);
            let state = StepState::new(&models, t, x.clone()).unwrap();
            let got = stepper.step(&models, &state, h).unwrap();
            let d = rel_diff(&got.y, &expected);
            prop_assert!(d <= 1e-12, "{}: {d:e}", scheme.name());
        }
    }
}

#[test]
fn euler_mri_and_spc_agree_bitwise() {
    let spec = Lorenz96Spec::default();
    let models = spec.model_pair().unwrap();
    let x0 = spec.spun_up_state().unwrap();
    let mri = sm_stepper(catalog::euler(), 3);
    let spc = sm_stepper(catalog::euler_spc(), 3);
    assert!(matches!(mri, Stepper::SmMri { .. }));
    assert!(matches!(spc, Stepper::SmSpc { .. }));
    let mut a = StepState::new(&models, 0.0, x0.clone()).unwrap();
    let mut b = a.clone();
    for _ in 0..5 {
        a = mri.step(&models, &a, 0.01).unwrap();
        b = spc.step(&models, &b, 0.01).unwrap();
    }
    assert_eq!(a.y, b.y);
    assert_eq!(a.y_hat, b.y_hat);
}

#[test]
fn full_surrogate_error_tracks_inner_solver() {
    // f_s = f: the macro error is the inner-solver error only.
    let lambda = -1.0;
    let rhs = || -> Arc<dyn Rhs> { Arc::new(FnRhs::new(1, move |_, y: &[f64], o: &mut [f64]| o[0] = lambda * y[0])) };
    let models = ModelPair::new(rhs(), rhs(), Arc::new(ProjectionPair::identity(1).unwrap())).unwrap();
    let exact = (lambda as f64).exp();
    for scheme in builtin_schemes() {
        let order = scheme.order() + 1;
        let mut errs = Vec::new();
        for m in [1usize, 2, 4, 8, 16] {
            let inner = InnerSolverConfig::with_order(order, m).unwrap();
            let stepper = Stepper::surrogate_model(scheme.clone(), inner).unwrap();
            let tr = integrate(&stepper, &models, 0.0, 1.0, &[1.0], 10, &IntegrateOptions::default()).unwrap();
            errs.push((tr.y[0] - exact).abs());
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate >= order as f64 - 0.2, "{}: {errs:?}", scheme.name());
        }
    }
}

#[test]
fn evaluation_counts_match_closed_form() {
    let spec = Lorenz96Spec::default();
    let x0 = spec.spun_up_state().unwrap();
    for scheme in builtin_schemes() {
        for m in [1usize, 3] {
            let models = spec.model_pair().unwrap();
            let s = scheme.stages() as u64;
            let inner = InnerSolverConfig::for_scheme(&scheme, m).unwrap();
            let s_inner = inner.method().stages() as u64;
            let kind = scheme.kind();
            let stepper = Stepper::surrogate_model(scheme.clone(), inner).unwrap();
            let tr = integrate(&stepper, &models, 0.0, 0.1, &x0, 7, &IntegrateOptions::default()).unwrap();
            let surrogate = match kind {
                SchemeKind::DecoupledMri => s * m as u64 * s_inner,
                SchemeKind::StepPredictorCorrector => m as u64 * s_inner + s,
            };
            assert_eq!(tr.full_evals, s * 7);
            assert_eq!(tr.surrogate_evals, surrogate * 7);
            assert_eq!(stepper.evals_per_step(), (s, surrogate));
        }
    }
}

#[test]
fn euler_local_error_constant() {
    let m = rotation_matrix();
    let mu = 0.5;
    let models = linear_test_problem(2, m.clone(), mu).unwrap();
    // ½(M − μI)M y0 with y0 = (1, 0): M y0 = (0, −1), (M − μI)(0, −1) = (−1, 0.5).
    let constant = 0.5 * (1.0f64 + 0.25).sqrt();
    let stepper = sm_stepper(catalog::euler(), 1);
    let mut last = f64::NAN;
    for k in 0..8 {
        let h = 0.1 / 2f64.powi(k);
        let state = StepState::new(&models, 0.0, vec![1.0, 0.0]).unwrap();
        let got = stepper.step(&models, &state, h).unwrap();
        let exact = expm_apply(2, &m, h, &[1.0, 0.0]);
        let err = ((got.y[0] - exact[0]).powi(2) + (got.y[1] - exact[1]).powi(2)).sqrt();
        last = err / (h * h);
    }
    assert!((last / constant - 1.0).abs() < 0.05, "{last} vs {constant}");
}

#[test]
fn one_step_is_linear_for_linear_models() {
    // Tridiagonal full model on 9 nodes, coarse 5-node surrogate.
    let full = FnRhs::new(9, |_, y: &[f64], o: &mut [f64]| {
        for i in 0..9 {
            let l = if i > 0 { y[i - 1] } else { 0.0 };
            let r = if i < 8 { y[i + 1] } else { 0.0 };
            o[i] = 0.7 * l - 1.3 * y[i] + 0.4 * r;
        }
    });
    let coarse = FnRhs::new(5, |_, z: &[f64], o: &mut [f64]| {
        for i in 0..5 {
            o[i] = -0.9 * z[i] + if i > 0 { 0.2 * z[i - 1] } else { 0.0 };
        }
    });
    let models = ModelPair::new(
        Arc::new(full),
        Arc::new(coarse),
        Arc::new(ProjectionPair::nested_mesh_1d(9).unwrap()),
    )
    .unwrap();
    let x: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
    let y: Vec<f64> = (0..9).map(|i| (i as f64 * 0.3).cos() - 0.5).collect();
    let (alpha, beta) = (1.7, -0.6);
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
    for scheme in builtin_schemes() {
        let stepper = sm_stepper(scheme.clone(), 2);
        let step = |v: &[f64]| {
            stepper
                .step(&models, &StepState::new(&models, 0.3, v.to_vec()).unwrap(), 0.2)
                .unwrap()
                .y
        };
        let (sx, sy, sxy) = (step(&x), step(&y), step(&xy));
        for i in 0..9 {
            let sup = alpha * sx[i] + beta * sy[i];
            assert!((sxy[i] - sup).abs() < 1e-10, "{}: {i}", scheme.name());
        }
    }
}

#[test]
fn spc_complement_update_is_base_runge_kutta() {
    // Outside range(V) the SPC update is the base RK update of the full model,
    // since the predictor stages never see the surrogate.
    let spec = BrusselatorSpec::with_p(17);
    let models = spec.model_pair(9).unwrap();
    let y0 = spec.initial_state();
    let p = models.projection();
    let complement = |v: &[f64]| -> Vec<f64> {
        let pv = p.lift(&p.restrict(v));
        v.iter().zip(&pv).map(|(a, b)| a - b).collect()
    };
    for scheme in [catalog::euler_spc(), catalog::ralston2_spc(), catalog::ralston3_spc()] {
        let stepper = sm_stepper(scheme.clone(), 1);
        let got = stepper.step(&models, &StepState::new(&models, 0.0, y0.clone()).unwrap(), 0.01).unwrap();
        let full = models.full_model().clone();
        let rk = rk_step(scheme.tableau(), |t, y, o| full.eval(t, y, o), 0.0, &y0, 0.01).unwrap();
        let (a, b) = (complement(&got.y), complement(&rk));
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-13, "{}: {d:e}", scheme.name());
        // And the surrogate part is really replaced: the updates differ inside range(V).
        assert!(rel_diff(&got.y, &rk) > 1e-10);
    }

    // Euler MRI has a single stage evaluated at y, so the same holds.
    let stepper = sm_stepper(catalog::euler(), 1);
    let got = stepper.step(&models, &StepState::new(&models, 0.0, y0.clone()).unwrap(), 0.01).unwrap();
    let full = models.full_model().clone();
    let rk = rk_step(&RkTableau::forward_euler(), |t, y, o| full.eval(t, y, o), 0.0, &y0, 0.01).unwrap();
    let d = complement(&got.y).iter().zip(complement(&rk)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d < 1e-13);
}

#[test]
fn cached_surrogate_state_stays_coherent() {
    let spec = BrusselatorSpec::with_p(17);
    let models = spec.model_pair(9).unwrap();
    let options = IntegrateOptions {
        dense_stride: Some(5),
        check_coherence: true,
    };
    for scheme in builtin_schemes() {
        let stepper = sm_stepper(scheme, 1);
        let tr = integrate(&stepper, &models, 0.0, 0.2, &spec.initial_state(), 20, &options).unwrap();
        assert_eq!(tr.samples.len(), 5);
        assert_eq!(tr.samples.last().unwrap().0, 0.2);
    }
}

#[test]
fn single_step_integration_and_zero_field() {
    let spec = Lorenz96Spec::default();
    let models = spec.model_pair().unwrap();
    let x0 = spec.spun_up_state().unwrap();
    let stepper = sm_stepper(catalog::ralston3_mri(), 2);
    let tr = integrate(&stepper, &models, 0.5, 0.55, &x0, 1, &IntegrateOptions::default()).unwrap();
    let one = stepper.step(&models, &StepState::new(&models, 0.5, x0.clone()).unwrap(), 0.55 - 0.5).unwrap();
    assert_eq!(tr.y, one.y);

    let zero = ModelPair::new(
        Arc::new(ZeroRhs(3)),
        Arc::new(ZeroRhs(3)),
        Arc::new(ProjectionPair::identity(3).unwrap()),
    )
    .unwrap();
    let y0 = [1.0, -2.0, 0.5];
    let mut steppers: Vec<Stepper> = builtin_schemes().into_iter().map(|s| sm_stepper(s, 2)).collect();
    steppers.push(Stepper::FullRk(RkTableau::ralston3()));
    steppers.push(Stepper::SurrogateRk(RkTableau::ralston2()));
    for st in &steppers {
        for n in [1, 3, 8] {
            let tr = integrate(st, &zero, 0.0, 1.0, &y0, n, &IntegrateOptions::default()).unwrap();
            assert_eq!(tr.y, y0);
        }
    }
}

#[test]
fn driver_rejects_bad_input() {
    let models = Lorenz96Spec::default().model_pair().unwrap();
    let st = Stepper::FullRk(RkTableau::forward_euler());
    let x0 = vec![8.0; 40];
    let opts = IntegrateOptions::default();
    assert!(integrate(&st, &models, 0.0, 1.0, &x0, 0, &opts).is_err());
    assert!(integrate(&st, &models, 1.0, 1.0, &x0, 4, &opts).is_err());
    assert!(integrate(&st, &models, 0.0, 1.0, &x0[..39], 4, &opts).is_err());
    let low = InnerSolverConfig::with_order(2, 1).unwrap();
    assert!(Stepper::surrogate_model(catalog::ralston3_mri(), low).is_err());
}

#[test]
fn blow_up_reports_step_index() {
    let blow = FnRhs::new(1, |_, y: &[f64], o: &mut [f64]| o[0] = y[0] * y[0]);
    let models = ModelPair::new(
        Arc::new(blow),
        Arc::new(ZeroRhs(1)),
        Arc::new(ProjectionPair::identity(1).unwrap()),
    )
    .unwrap();
    let st = Stepper::FullRk(RkTableau::forward_euler());
    let err = integrate(&st, &models, 0.0, 10.0, &[1e100], 10, &IntegrateOptions::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("macro step 1"), "{msg}");
}

#[test]
fn surrogate_rk_lifts_the_surrogate_solution() {
    let spec = BrusselatorSpec::with_p(9);
    let models = spec.model_pair(5).unwrap();
    let st = Stepper::SurrogateRk(RkTableau::ralston2());
    let tr = integrate(&st, &models, 0.0, 0.1, &spec.initial_state(), 4, &IntegrateOptions::default()).unwrap();
    assert_eq!(tr.full_evals, 0);
    assert_eq!(tr.surrogate_evals, 8);
    let p = models.projection();
    assert_eq!(p.lift(&p.restrict(&tr.y)), tr.y);
}
