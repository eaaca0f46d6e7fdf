use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::model::{ParamId, Params};
use crate::NetError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaDeltaConfig {
    pub rho: f64,
    pub eps: f64,
    /// Multiplier on the computed step; 1.0 is plain AdaDelta.
    pub lr: f64,
}

impl Default for AdaDeltaConfig {
    fn default() -> Self {
        AdaDeltaConfig { rho: 0.95, eps: 1e-6, lr: 1.0 }
    }
}

/// Running averages of squared gradients and squared updates, one pair per
/// parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaDelta {
    pub config: AdaDeltaConfig,
    pub sq_grad: Params,
    pub sq_update: Params,
}

impl AdaDelta {
    pub fn new(config: AdaDeltaConfig, params: &Params) -> AdaDelta {
        AdaDelta { config, sq_grad: params.zeros_like(), sq_update: params.zeros_like() }
    }

    /// Applies one update to every tensor with `trainable[i]` set. Nothing is
    /// modified when any gradient is non-finite.
    pub fn step(&mut self, params: &mut Params, grads: &Params, trainable: &[bool]) -> Result<(), NetError> {
        for (i, g) in grads.tensors.iter().enumerate() {
            if !trainable[i] {
                continue;
            }
            if g.raw_dim() != params.tensors[i].raw_dim() {
                return Err(NetError::Shape {
                    what: "gradient",
                    expected: params.tensors[i].dim(),
                    found: g.dim(),
                });
            }
            if let Some((index, &value)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(NetError::NonFinite { tensor: ParamId::ALL[i].name(), index, value });
            }
        }
        let AdaDeltaConfig { rho, eps, lr } = self.config;
        for (i, g) in grads.tensors.iter().enumerate() {
            if !trainable[i] {
                continue;
            }
            let p: &mut Array2<f64> = &mut params.tensors[i];
            Zip::from(p)
                .and(g)
                .and(&mut self.sq_grad.tensors[i])
                .and(&mut self.sq_update.tensors[i])
                .for_each(|p, &g, eg, ex| {
                    *eg = rho * *eg + (1.0 - rho) * g * g;
                    let dx = -((*ex + eps).sqrt() / (*eg + eps).sqrt()) * g;
                    *ex = rho * *ex + (1.0 - rho) * dx * dx;
                    *p += lr * dx;
                });
        }
        Ok(())
    }
}
