//! RMSProp.

use serde::{Deserialize, Serialize};

use super::tensor::ParamSet;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.99;
pub const DEFAULT_EPS: f64 = 1e-8;

/// `v ← αv + (1−α)g²`, `θ ← θ − lr·g/(√v + eps)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RmsProp {
    pub lr: f64,
    pub alpha: f64,
    pub eps: f64,
    square_avg: Option<ParamSet>,
}

impl RmsProp {
    pub fn new(lr: f64) -> Self {
        RmsProp {
            lr,
            alpha: DEFAULT_ALPHA,
            eps: DEFAULT_EPS,
            square_avg: None,
        }
    }

    /// Fails without touching `params` if any gradient is non-finite.
    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet) -> Result<()> {
        if !grads.all_finite() {
            return Err(Error::NonFinite("gradient".into()));
        }
        let v = self.square_avg.get_or_insert_with(|| params.zeros_like());
        for ((p, g), v) in params
            .tensors_mut()
            .iter_mut()
            .zip(grads.tensors())
            .zip(v.tensors_mut())
        {
            for ((p, &g), v) in p.data.iter_mut().zip(&g.data).zip(v.data.iter_mut()) {
                *v = self.alpha * *v + (1.0 - self.alpha) * g * g;
                *p -= self.lr * g / (v.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
