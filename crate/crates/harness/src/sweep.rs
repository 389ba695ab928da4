//! Reference solutions, fixed-step sweeps and convergence-slope fitting.

use rayon::prelude::*;
use smmr_core::coefficients::{builtin_schemes, load_scheme_file, CouplingScheme, RkTableau};
use smmr_core::integrators::{integrate, InnerSolverConfig, IntegrateOptions, Stepper};

use crate::config::{MethodSpec, SweepConfig};
use crate::setup::{build_problem, ProblemSetup};
use crate::HarnessError;

/// The reference takes this many steps per step of the finest sweep run.
pub const REFERENCE_REFINEMENT: usize = 64;
/// Points improving by less than this factor per halving of `H` are treated
/// as sitting on the error floor.
pub const FLOOR_IMPROVEMENT: f64 = 1.1;

/// One `(method, H)` run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub n_steps: usize,
    pub h: f64,
    pub error: f64,
    pub full_evals: u64,
    pub surrogate_evals: u64,
    pub wall_s: f64,
    /// Closed-form `(full, surrogate)` counts for this run.
    pub expected_evals: (u64, u64),
}

impl SweepRow {
    pub fn counts_match(&self) -> bool {
        (self.full_evals, self.surrogate_evals) == self.expected_evals
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub method: String,
    pub n_steps: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub method: String,
    pub nominal_order: u32,
    /// Least-squares slope of `log error` against `log H` over `points`
    /// rows, or `None` with fewer than two usable points.
    pub slope: Option<f64>,
    pub points: usize,
    /// Rows dropped from the fine end as error-floor points.
    pub floor_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceInfo {
    pub n_steps: usize,
    /// Relative ℓ2 change when the reference step is halved, divided by the
    /// smallest sweep error. Above 0.1 the reference is too coarse.
    pub gate_ratio: Option<f64>,
}

impl ReferenceInfo {
    pub fn passed(&self) -> bool {
        self.gate_ratio.map_or(true, |r| r < 0.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub problem: String,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<RunFailure>,
    pub slopes: Vec<SlopeFit>,
    pub reference: Option<ReferenceInfo>,
}

impl SweepReport {
    pub fn audit_failures(&self) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| !r.counts_match()).collect()
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.audit_failures().is_empty()
    }

    pub fn slope(&self, method: &str) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.method == method)
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

/// `‖y − y_ref‖₂ / ‖y_ref‖₂`.
pub fn relative_l2_error(y: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = y.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Order-3 Runge–Kutta on the full model with `n_steps` equal steps.
pub fn reference_solve(setup: &ProblemSetup, n_steps: usize) -> Result<Vec<f64>, HarnessError> {
    if setup.t_end == setup.t0 {
        return Ok(setup.y0.clone());
    }
    let models = setup.models.fresh();
    let stepper = Stepper::FullRk(RkTableau::ralston3());
    let tr = integrate(
        &stepper,
        &models,
        setup.t0,
        setup.t_end,
        &setup.y0,
        n_steps,
        &IntegrateOptions::default(),
    )?;
    Ok(tr.y)
}

/// Every scheme addressable by name: the built-ins plus a loaded scheme file.
pub fn scheme_catalog(config: &SweepConfig) -> Result<Vec<CouplingScheme>, HarnessError> {
    let mut all = builtin_schemes();
    if let Some(path) = &config.scheme_file {
        let s = load_scheme_file(path)?;
        let diagnostics = s.validate();
        if !diagnostics.is_empty() {
            let list: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
            return Err(HarnessError::Config(format!(
                "scheme file {} fails validation: {}",
                path.display(),
                list.join("; ")
            )));
        }
        all.retain(|b| b.name() != s.name());
        all.push(s);
    }
    Ok(all)
}

/// Resolves a method entry to a stepper under the configured inner solver.
pub fn build_stepper(
    method: &MethodSpec,
    catalog: &[CouplingScheme],
    config: &SweepConfig,
) -> Result<Stepper, HarnessError> {
    match method {
        MethodSpec::RkFull(o) => Ok(Stepper::FullRk(RkTableau::with_order(*o)?)),
        MethodSpec::RkSurrogate(o) => Ok(Stepper::SurrogateRk(RkTableau::with_order(*o)?)),
        MethodSpec::Scheme(name) => {
            let scheme = catalog
                .iter()
                .find(|s| s.name() == name)
                .ok_or_else(|| {
                    let names: Vec<&str> = catalog.iter().map(|s| s.name()).collect();
                    HarnessError::Config(format!(
                        "unknown method '{name}' (known: {}, rk-full[:k], rk-surrogate[:k])",
                        names.join(", ")
                    ))
                })?
                .clone();
            let order = config.inner_order.unwrap_or(scheme.order() + 1);
            let inner = InnerSolverConfig::with_order(order, config.micro_steps)?;
            Stepper::surrogate_model(scheme, inner).map_err(|e| HarnessError::Config(e.to_string()))
        }
    }
}

/// Least-squares slope of `ln e` against `ln H` after dropping trailing
/// floor points. `points` must be ordered by decreasing `H`.
pub fn fit_slope(points: &[(f64, f64)]) -> (Option<f64>, usize, usize) {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(h, e)| h > 0.0 && e > 0.0 && e.is_finite())
        .collect();
    let mut end = usable.len();
    while end >= 2 {
        let (h0, e0) = usable[end - 2];
        let (h1, e1) = usable[end - 1];
        let per_halving = (e0 / e1).powf(2f64.ln() / (h0 / h1).ln());
        if per_halving >= FLOOR_IMPROVEMENT {
            break;
        }
        end -= 1;
    }
    let kept = &usable[..end];
    let floor = usable.len() - end;
    if kept.len() < 2 {
        return (None, kept.len(), floor);
    }
    let n = kept.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = kept.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (Some(sxy / sxx), kept.len(), floor)
}

/// Runs every `(method, H)` pair against a full-model reference.
///
/// Runs share nothing but the immutable model definitions; each gets fresh
/// counters. With `jobs > 1` they execute on a worker pool, which requires
/// the problem's right-hand sides to be safe to call concurrently (all
/// built-in problems are pure functions).
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport, HarnessError> {
    config.validate()?;
    let setup = build_problem(&config.problem)?;
    let catalog = scheme_catalog(config)?;
    let steppers: Vec<(String, Stepper)> = config
        .methods
        .iter()
        .map(|m| Ok((m.to_string(), build_stepper(m, &catalog, config)?)))
        .collect::<Result<_, HarnessError>>()?;
    let counts = config.steps.counts()?;
    let finest = *counts.last().expect("validated non-empty");

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;

    let n_ref = finest * REFERENCE_REFINEMENT;
    let (reference, check) = pool.install(|| {
        rayon::join(
            || reference_solve(&setup, n_ref),
            || {
                config
                    .reference_check
                    .then(|| reference_solve(&setup, n_ref / 2))
            },
        )
    });
    let reference = reference?;
    let check = check.transpose()?;

    if config.warm_up {
        for (_, st) in &steppers {
            let models = setup.models.fresh();
            let _ = integrate(
                st,
                &models,
                setup.t0,
                setup.t_end,
                &setup.y0,
                counts[0],
                &IntegrateOptions::default(),
            );
        }
    }

    let jobs: Vec<(usize, usize)> = (0..steppers.len())
        .flat_map(|m| counts.iter().map(move |&n| (m, n)))
        .collect();
    let results: Vec<Result<SweepRow, RunFailure>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(m, n)| {
                let (name, st) = &steppers[m];
                let models = setup.models.fresh();
                let h = (setup.t_end - setup.t0) / n as f64;
                let (fpe, spe) = st.evals_per_step();
                match integrate(
                    st,
                    &models,
                    setup.t0,
                    setup.t_end,
                    &setup.y0,
                    n,
                    &IntegrateOptions::default(),
                ) {
                    Ok(tr) => Ok(SweepRow {
                        method: name.clone(),
                        n_steps: n,
                        h,
                        error: relative_l2_error(&tr.y, &reference),
                        full_evals: tr.full_evals,
                        surrogate_evals: tr.surrogate_evals,
                        wall_s: tr.wall.as_secs_f64(),
                        expected_evals: (fpe * n as u64, spe * n as u64),
                    }),
                    Err(e) => Err(RunFailure {
                        method: name.clone(),
                        n_steps: n,
                        message: e.to_string(),
                    }),
                }
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }

    let slopes = steppers
        .iter()
        .map(|(name, st)| {
            let pts: Vec<(f64, f64)> =
                rows.iter().filter(|r| &r.method == name).map(|r| (r.h, r.error)).collect();
            let (slope, points, floor_points) = fit_slope(&pts);
            SlopeFit {
                method: name.clone(),
                nominal_order: st.order(),
                slope,
                points,
                floor_points,
            }
        })
        .collect();

    let min_error = rows.iter().map(|r| r.error).filter(|e| *e > 0.0).fold(f64::INFINITY, f64::min);
    let reference_info = ReferenceInfo {
        n_steps: n_ref,
        gate_ratio: check.map(|c| relative_l2_error(&c, &reference) / min_error),
    };

    Ok(SweepReport {
        problem: setup.description.clone(),
        rows,
        failures,
        slopes,
        reference: Some(reference_info),
    })
}

/// Sweep without warm-up, for measuring convergence slopes.
pub fn convergence_study(config: &SweepConfig) -> Result<SweepReport, HarnessError> {
    let mut c = config.clone();
    c.warm_up = false;
    run_sweep(&c)
}

/// Sweep with a discarded warm-up run per method, for timing.
pub fn work_precision(config: &SweepConfig) -> Result<SweepReport, HarnessError> {
    let mut c = config.clone();
    c.warm_up = true;
    run_sweep(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = (0..6).map(|k| {
            let h = 0.1 / 2f64.powi(k);
            (h, 3.0 * h.powi(2))
        }).collect();
        let (s, n, floor) = fit_slope(&pts);
        assert!((s.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!((n, floor), (6, 0));
    }

    #[test]
    fn floor_points_are_dropped() {
        let mut pts: Vec<(f64, f64)> = (0..5).map(|k| {
            let h = 0.1 / 2f64.powi(k);
            (h, h)
        }).collect();
        let last = pts[4].1;
        pts.push((0.1 / 32.0, last * 0.95));
        pts.push((0.1 / 64.0, last * 0.94));
        let (s, n, floor) = fit_slope(&pts);
        assert!((s.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!((n, floor), (5, 2));
    }

    #[test]
    fn floor_test_normalizes_the_ratio() {
        // Ratio 1.5 with first-order decay improves by 1.5 per step, which is
        // 2 per halving, so nothing is dropped.
        let pts: Vec<(f64, f64)> = (0..5).map(|k| {
            let h = 1.0 / 1.5f64.powi(k);
            (h, h)
        }).collect();
        assert_eq!(fit_slope(&pts).2, 0);
    }

    #[test]
    fn degenerate_fits() {
        assert_eq!(fit_slope(&[(0.1, 1.0)]).0, None);
        assert_eq!(fit_slope(&[(0.1, 1.0), (0.05, 1.0)]).0, None);
        assert_eq!(fit_slope(&[]).1, 0);
    }

    #[test]
    fn relative_error() {
        assert_eq!(relative_l2_error(&[3.0, 4.0], &[3.0, 4.0]), 0.0);
        assert!((relative_l2_error(&[3.0, 5.0], &[3.0, 4.0]) - 0.2).abs() < 1e-15);
    }
}
