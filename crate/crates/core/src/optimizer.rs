//! Adam and a plain L2-regularized SGD step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.lr)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::Config(format!("adam eps must be > 0, got {}", self.eps)));
        }
        Ok(())
    }
}

/// First/second moment estimates, one entry per parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub t: u64,
}

impl AdamState {
    pub fn new<'a>(config: AdamConfig, params: impl IntoIterator<Item = &'a Tensor>) -> Self {
        let m: Vec<Tensor> = params
            .into_iter()
            .map(|p| Tensor::zeros(p.shape()))
            .collect();
        AdamState {
            config,
            v: m.clone(),
            m,
            t: 0,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::dim(format!(
                "adam state tracks {} blocks, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != self.m[i].shape() || g.shape() != self.m[i].shape() {
                return Err(Error::dim(format!(
                    "block {i}: param {:?}, grad {:?}, state {:?}",
                    p.shape(),
                    g.shape(),
                    self.m[i].shape()
                )));
            }
        }

        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        self.t += 1;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for (((w, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Result of an L2-regularized SGD step.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdStep {
    pub params: Vec<f64>,
    /// Set when `lr·alpha ≥ 1`: the decay factor is no longer positive and the
    /// step flips or zeroes the weights instead of shrinking them.
    pub nonpositive_decay: bool,
}

/// `ω ← (1 − lr·α)·ω − lr·∇J`, i.e. gradient descent on `J + α·ωᵀω/2`.
pub fn sgd_l2_step(params: &[f64], data_grads: &[f64], lr: f64, alpha: f64) -> Result<SgdStep> {
    if params.len() != data_grads.len() {
        return Err(Error::dim(format!(
            "{} params vs {} gradients",
            params.len(),
            data_grads.len()
        )));
    }
    let decay = 1.0 - lr * alpha;
    let params = params
        .iter()
        .zip(data_grads)
        .map(|(&w, &g)| decay * w - lr * g)
        .collect();
    Ok(SgdStep {
        params,
        nonpositive_decay: decay <= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(v: f64) -> Tensor {
        Tensor::vector(&[v])
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut w = one(0.25);
        let mut state = AdamState::new(AdamConfig::default(), [&w]);
        state.step(&mut [&mut w], &[one(0.0)]).unwrap();
        assert_eq!(w.data(), &[0.25]);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut w = one(0.0);
        let mut state = AdamState::new(AdamConfig::default(), [&w]);
        state.step(&mut [&mut w], &[one(2.0)]).unwrap();
        // m̂ = 2, v̂ = 4 -> Δ = -lr·2/(2 + 1e-8)
        let expect = -1e-3 * 2.0 / (2.0 + 1e-8);
        assert!((w.data()[0] - expect).abs() < 1e-18);
        assert!((w.data()[0] + 1e-3).abs() < 1e-11);
    }

    #[test]
    fn constant_gradient_steps_are_lr_sized() {
        let mut w = one(1.0);
        let mut state = AdamState::new(AdamConfig::default(), [&w]);
        let mut prev = 1.0;
        for _ in 0..2 {
            state.step(&mut [&mut w], &[one(-0.3)]).unwrap();
            let delta = w.data()[0] - prev;
            assert!((delta - 1e-3).abs() < 1e-6);
            prev = w.data()[0];
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut w = one(1.0);
        let mut state = AdamState::new(AdamConfig::default(), [&w]);
        let err = state.step(&mut [&mut w], &[Tensor::zeros(&[2])]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn weight_decay_example() {
        let s = sgd_l2_step(&[1.0], &[0.0], 0.1, 0.5).unwrap();
        assert!((s.params[0] - 0.95).abs() < 1e-15);
        assert!(!s.nonpositive_decay);
    }

    #[test]
    fn no_decay_is_plain_sgd() {
        let s = sgd_l2_step(&[1.0, -2.0], &[0.5, 4.0], 0.1, 0.0).unwrap();
        assert_eq!(s.params, vec![1.0 - 0.1 * 0.5, -2.0 - 0.1 * 4.0]);
    }

    #[test]
    fn oversized_decay_flagged() {
        let s = sgd_l2_step(&[1.0], &[0.0], 2.0, 0.5).unwrap();
        assert!(s.nonpositive_decay);
    }
}
