use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::num::Real;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_LR: f64 = 0.01;

/// Hyperparameters of an ADAM optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    #[serde(default = "beta1")]
    pub beta1: f64,
    #[serde(default = "beta2")]
    pub beta2: f64,
    #[serde(default = "epsilon")]
    pub epsilon: f64,
}

fn beta1() -> f64 {
    DEFAULT_BETA1
}
fn beta2() -> f64 {
    DEFAULT_BETA2
}
fn epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self::with_lr(DEFAULT_LR)
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Moment estimates of a bias-corrected ADAM minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T: Real> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub t: u64,
    pub config: AdamConfig,
}

impl<T: Real> AdamState<T> {
    pub fn new(n_params: usize, config: AdamConfig) -> Self {
        Self {
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            t: 0,
            config,
        }
    }

    /// One descent step on `params` along `grads`.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        check_len("adam parameters", self.m.len(), params.len())?;
        check_len("adam gradients", self.m.len(), grads.len())?;
        self.t += 1;
        let b1 = T::of(self.config.beta1);
        let b2 = T::of(self.config.beta2);
        let lr = T::of(self.config.lr);
        let eps = T::of(self.config.epsilon);
        let t = self.t as i32;
        let c1 = T::one() - b1.powi(t);
        let c2 = T::one() - b2.powi(t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

/// ADAM with a fixed learning rate, the optimizer every model here uses.
pub fn adam_step<T: Real>(params: &mut [T], grads: &[T], state: &mut AdamState<T>) -> Result<()> {
    state.step(params, grads)
}
