use serde::{Deserialize, Serialize};

use super::{ParamGroup, ParamGroupKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub encoder_lr: f64,
    pub head_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            encoder_lr: 0.002,
            head_lr: 0.002,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    fn lr(&self, kind: ParamGroupKind) -> f64 {
        match kind {
            ParamGroupKind::Encoder => self.encoder_lr,
            ParamGroupKind::Head => self.head_lr,
        }
    }
}

/// Adam with one learning rate per parameter group.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    groups: Vec<ParamGroup>,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, groups: Vec<ParamGroup>, num_params: usize) -> Result<Self> {
        let mut covered = vec![false; num_params];
        for g in &groups {
            if g.range.end > num_params {
                return Err(Error::invalid("parameter group", "range past the parameter vector"));
            }
            for c in &mut covered[g.range.clone()] {
                if *c {
                    return Err(Error::invalid("parameter group", "overlapping groups"));
                }
                *c = true;
            }
        }
        Ok(Adam {
            config,
            groups,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape {
                expected: (self.m.len(), 1),
                actual: (params.len().min(grads.len()), 1),
            });
        }
        self.step += 1;
        let (b1, b2, eps) = (self.config.beta1, self.config.beta2, self.config.eps);
        let t = self.step as i32;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for group in &self.groups {
            let lr = self.config.lr(group.kind);
            for i in group.range.clone() {
                let g = grads[i];
                let m = b1 * self.m[i] + (1.0 - b1) * g;
                let v = b2 * self.v[i] + (1.0 - b2) * g * g;
                self.m[i] = m;
                self.v[i] = v;
                if lr != 0.0 && m != 0.0 {
                    params[i] -= lr * (m / c1) / ((v / c2).sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}
