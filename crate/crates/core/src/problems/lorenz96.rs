//! Lorenz '96 with a perturbed-forcing surrogate.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::coefficients::RkTableau;
use crate::integrators::{rk_step, ModelPair, Rhs};
use crate::projections::ProjectionPair;

use super::ProblemError;

/// Length of the spin-up from the perturbed equilibrium.
pub const SPIN_UP_TIME: f64 = 2.0;
const SPIN_UP_STEPS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz96Spec {
    pub k: usize,
    pub forcing: f64,
    pub surrogate_forcing: f64,
}

impl Default for Lorenz96Spec {
    fn default() -> Self {
        Self {
            k: 40,
            forcing: 8.0,
            surrogate_forcing: 7.5,
        }
    }
}

/// `dX_k/dt = −X_{k−2} X_{k−1} + X_{k−1} X_{k+1} − X_k + F`, indices mod K.
pub fn lorenz96_rhs(forcing: f64, x: &[f64], dxdt: &mut [f64]) {
    let k = x.len();
    for i in 0..k {
        let m2 = x[(i + k - 2) % k];
        let m1 = x[(i + k - 1) % k];
        let p1 = x[(i + 1) % k];
        dxdt[i] = (p1 - m2) * m1 - x[i] + forcing;
    }
}

/// The cyclic system with a fixed forcing, as an [`Rhs`].
#[derive(Debug, Clone, Copy)]
pub struct Lorenz96 {
    pub k: usize,
    pub forcing: f64,
}

impl Rhs for Lorenz96 {
    fn dim(&self) -> usize {
        self.k
    }

    fn eval(&self, _t: f64, x: &[f64], dxdt: &mut [f64]) {
        lorenz96_rhs(self.forcing, x, dxdt);
    }
}

impl Lorenz96Spec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.k < 4 {
            return Err(ProblemError::InvalidParameter(format!(
                "Lorenz '96 needs K >= 4, got {}",
                self.k
            )));
        }
        if !self.forcing.is_finite() || !self.surrogate_forcing.is_finite() {
            return Err(ProblemError::InvalidParameter("non-finite forcing".into()));
        }
        Ok(())
    }

    pub fn full(&self) -> Lorenz96 {
        Lorenz96 {
            k: self.k,
            forcing: self.forcing,
        }
    }

    /// Same dynamics with `F` replaced by the surrogate forcing.
    pub fn surrogate(&self) -> Lorenz96 {
        Lorenz96 {
            k: self.k,
            forcing: self.surrogate_forcing,
        }
    }

    /// Full and surrogate models on the same space, `V = W* = I`.
    pub fn model_pair(&self) -> Result<ModelPair, ProblemError> {
        self.validate()?;
        let projection = Arc::new(ProjectionPair::identity(self.k)?);
        Ok(ModelPair::new(
            Arc::new(self.full()),
            Arc::new(self.surrogate()),
            projection,
        )?)
    }

    /// `X ≡ F` with the middle component (`X_20` for K = 40) nudged by 0.1%.
    pub fn perturbed_equilibrium(&self) -> Vec<f64> {
        let mut x = vec![self.forcing; self.k];
        x[self.k / 2 - 1] = self.forcing * 1.001;
        x
    }

    /// The perturbed equilibrium carried forward [`SPIN_UP_TIME`] units with
    /// the full model. Computed once per `(K, F)` and cached.
    pub fn spun_up_state(&self) -> Result<Vec<f64>, ProblemError> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Vec<f64>>>> = OnceLock::new();
        let key = (self.k, self.forcing.to_bits());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(x) = cache.lock().unwrap().get(&key) {
            return Ok(x.clone());
        }
        self.validate()?;
        let tab = RkTableau::ralston3();
        let h = SPIN_UP_TIME / SPIN_UP_STEPS as f64;
        let model = self.full();
        let mut x = self.perturbed_equilibrium();
        for n in 0..SPIN_UP_STEPS {
            x = rk_step(&tab, |t, y, o| model.eval(t, y, o), n as f64 * h, &x, h)?;
        }
        cache.lock().unwrap().insert(key, x.clone());
        Ok(x)
    }
}
