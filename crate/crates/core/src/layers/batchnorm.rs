//! Per-channel batch normalization over the (batch, time) axes.

use serde::{Deserialize, Serialize};

use super::Mode;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const DEFAULT_EPS: f64 = 1e-5;
pub const DEFAULT_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormParams {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
    pub eps: f64,
    pub momentum: f64,
}

impl BatchNormParams {
    /// Identity affine map with running statistics (0, 1).
    pub fn new(channels: usize, eps: f64, momentum: f64) -> Result<Self> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Config(format!("batchnorm eps must be > 0, got {eps}")));
        }
        if !(momentum > 0.0 && momentum < 1.0) {
            return Err(Error::Config(format!(
                "batchnorm momentum must lie in (0, 1), got {momentum}"
            )));
        }
        Ok(BatchNormParams {
            gamma: Tensor::full(&[channels], 1.0),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::full(&[channels], 1.0),
            eps,
            momentum,
        })
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    /// Exponential moving update of the running statistics.
    pub fn update_running(&mut self, stats: &BatchStats) {
        let m = self.momentum;
        for (r, &s) in self.running_mean.data_mut().iter_mut().zip(&stats.mean) {
            *r = (1.0 - m) * *r + m * s;
        }
        for (r, &s) in self.running_var.data_mut().iter_mut().zip(&stats.var) {
            *r = (1.0 - m) * *r + m * s;
        }
    }
}

/// Per-channel batch mean and population variance.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum BnCache {
    /// Normalized with the current batch's statistics.
    Batch {
        x_hat: Tensor,
        inv_std: Vec<f64>,
        stats: BatchStats,
    },
    /// Normalized with running statistics but still differentiated (training
    /// on batches too small for reliable statistics).
    Frozen { x_hat: Tensor, inv_std: Vec<f64> },
    /// Inference; nothing retained.
    Eval,
}

impl BnCache {
    pub fn batch_stats(&self) -> Option<&BatchStats> {
        match self {
            BnCache::Batch { stats, .. } => Some(stats),
            _ => None,
        }
    }
}

pub struct BnGrads {
    pub x: Tensor,
    pub gamma: Tensor,
    pub beta: Tensor,
}

fn check(x: &Tensor, p: &BatchNormParams) -> Result<(usize, usize, usize)> {
    let (b, c, t) = x.dims3("batchnorm input")?;
    if c != p.channels() {
        return Err(Error::dim(format!(
            "batchnorm input has {c} channels, params have {}",
            p.channels()
        )));
    }
    Ok((b, c, t))
}

fn normalize_with(
    x: &Tensor,
    p: &BatchNormParams,
    mean: &[f64],
    inv_std: &[f64],
) -> Result<(Tensor, Tensor)> {
    let (b, c, t) = check(x, p)?;
    let mut x_hat = vec![0.0; x.len()];
    let mut y = vec![0.0; x.len()];
    for bi in 0..b {
        for ci in 0..c {
            let off = (bi * c + ci) * t;
            let (g, be) = (p.gamma.data()[ci], p.beta.data()[ci]);
            for i in off..off + t {
                let h = (x.data()[i] - mean[ci]) * inv_std[ci];
                x_hat[i] = h;
                y[i] = g * h + be;
            }
        }
    }
    Ok((
        Tensor::new(x.shape().to_vec(), x_hat)?,
        Tensor::new(x.shape().to_vec(), y)?,
    ))
}

/// Per-channel mean and population variance over (batch, time).
pub fn channel_stats(x: &Tensor) -> Result<BatchStats> {
    let (b, c, t) = x.dims3("batchnorm input")?;
    let n = (b * t) as f64;
    let mut mean = vec![0.0; c];
    let mut var = vec![0.0; c];
    for ci in 0..c {
        let mut s = 0.0;
        for bi in 0..b {
            s += x.data()[(bi * c + ci) * t..(bi * c + ci + 1) * t].iter().sum::<f64>();
        }
        let mu = s / n;
        let mut v = 0.0;
        for bi in 0..b {
            for &xv in &x.data()[(bi * c + ci) * t..(bi * c + ci + 1) * t] {
                v += (xv - mu) * (xv - mu);
            }
        }
        mean[ci] = mu;
        var[ci] = v / n;
    }
    Ok(BatchStats { mean, var })
}

/// Normalizes `x` without touching `p`. In train mode the batch statistics
/// are returned in the cache; apply them with
/// [`BatchNormParams::update_running`].
pub fn batchnorm_normalize(
    x: &Tensor,
    p: &BatchNormParams,
    mode: Mode,
) -> Result<(Tensor, BnCache)> {
    let (b, _, t) = check(x, p)?;
    match mode {
        Mode::Train => {
            if b * t < 2 {
                return Err(Error::DegenerateBatch(format!(
                    "train-mode batchnorm needs at least 2 values per channel, got {}",
                    b * t
                )));
            }
            let stats = channel_stats(x)?;
            let inv_std: Vec<f64> = stats.var.iter().map(|v| 1.0 / (v + p.eps).sqrt()).collect();
            let (x_hat, y) = normalize_with(x, p, &stats.mean, &inv_std)?;
            Ok((
                y,
                BnCache::Batch {
                    x_hat,
                    inv_std,
                    stats,
                },
            ))
        }
        Mode::Eval => {
            let inv_std = running_inv_std(p);
            let (_, y) = normalize_with(x, p, p.running_mean.data(), &inv_std)?;
            Ok((y, BnCache::Eval))
        }
    }
}

/// Normalizes with running statistics and keeps what the backward pass needs.
pub fn batchnorm_forward_frozen(x: &Tensor, p: &BatchNormParams) -> Result<(Tensor, BnCache)> {
    let inv_std = running_inv_std(p);
    let (x_hat, y) = normalize_with(x, p, p.running_mean.data(), &inv_std)?;
    Ok((y, BnCache::Frozen { x_hat, inv_std }))
}

fn running_inv_std(p: &BatchNormParams) -> Vec<f64> {
    p.running_var
        .data()
        .iter()
        .map(|v| 1.0 / (v + p.eps).sqrt())
        .collect()
}

/// Forward pass that also folds the batch statistics into the running
/// averages when in train mode.
pub fn batchnorm_forward(
    x: &Tensor,
    p: &mut BatchNormParams,
    mode: Mode,
) -> Result<(Tensor, BnCache)> {
    let (y, cache) = batchnorm_normalize(x, p, mode)?;
    if let Some(stats) = cache.batch_stats() {
        p.update_running(stats);
    }
    Ok((y, cache))
}

pub fn batchnorm_backward(
    cache: &BnCache,
    p: &BatchNormParams,
    grad_out: &Tensor,
) -> Result<BnGrads> {
    let (x_hat, inv_std, through_stats) = match cache {
        BnCache::Batch { x_hat, inv_std, .. } => (x_hat, inv_std, true),
        BnCache::Frozen { x_hat, inv_std } => (x_hat, inv_std, false),
        BnCache::Eval => {
            return Err(Error::Usage(
                "batchnorm_backward needs a cache from a training forward pass".into(),
            ))
        }
    };
    let (b, c, t) = check(x_hat, p)?;
    grad_out.expect_shape(x_hat.shape(), "batchnorm grad_out")?;
    let g = grad_out.data();
    let xh = x_hat.data();
    let n = (b * t) as f64;

    let mut grad_gamma = vec![0.0; c];
    let mut grad_beta = vec![0.0; c];
    for bi in 0..b {
        for ci in 0..c {
            let off = (bi * c + ci) * t;
            for i in off..off + t {
                grad_gamma[ci] += g[i] * xh[i];
                grad_beta[ci] += g[i];
            }
        }
    }

    let mut grad_x = vec![0.0; g.len()];
    for ci in 0..c {
        let scale = p.gamma.data()[ci] * inv_std[ci];
        // sum(g) and sum(g·x̂) are exactly grad_beta and grad_gamma
        let (sum_g, sum_gx) = (grad_beta[ci], grad_gamma[ci]);
        for bi in 0..b {
            let off = (bi * c + ci) * t;
            for i in off..off + t {
                grad_x[i] = if through_stats {
                    scale * (g[i] - sum_g / n - xh[i] * sum_gx / n)
                } else {
                    scale * g[i]
                };
            }
        }
    }

    Ok(BnGrads {
        x: Tensor::new(x_hat.shape().to_vec(), grad_x)?,
        gamma: Tensor::new(vec![c], grad_gamma)?,
        beta: Tensor::new(vec![c], grad_beta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64, beta: f64) -> BatchNormParams {
        let mut p = BatchNormParams::new(1, DEFAULT_EPS, DEFAULT_MOMENTUM).unwrap();
        p.gamma = Tensor::vector(&[gamma]);
        p.beta = Tensor::vector(&[beta]);
        p
    }

    fn series(v: &[f64]) -> Tensor {
        Tensor::new(vec![1, 1, v.len()], v.to_vec()).unwrap()
    }

    #[test]
    fn constant_channel_maps_to_beta() {
        let (y, _) = batchnorm_normalize(&series(&[3.0; 4]), &params(1.0, 0.0), Mode::Train).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_pair() {
        let (y, _) = batchnorm_normalize(&series(&[-1.0, 1.0]), &params(1.0, 0.0), Mode::Train).unwrap();
        let expect = 1.0 / (1.0f64 + 1e-5).sqrt();
        assert!((y.data()[0] + expect).abs() < 1e-15);
        assert!((y.data()[1] - expect).abs() < 1e-15);
        assert!((expect - 0.999995).abs() < 1e-10);
    }

    #[test]
    fn affine_applied_after_normalizing() {
        let (y, _) = batchnorm_normalize(&series(&[-1.0, 1.0]), &params(2.0, 3.0), Mode::Train).unwrap();
        assert!((y.data()[0] - 1.00001).abs() < 1e-9);
        assert!((y.data()[1] - 4.99999).abs() < 1e-9);
    }

    #[test]
    fn running_stats_update() {
        let mut p = params(1.0, 0.0);
        batchnorm_forward(&series(&[1.0, 3.0]), &mut p, Mode::Train).unwrap();
        // batch mean 2, population variance 1
        assert!((p.running_mean.data()[0] - 0.2).abs() < 1e-15);
        assert!((p.running_var.data()[0] - 1.0).abs() < 1e-15);
        batchnorm_forward(&series(&[5.0, 7.0]), &mut p, Mode::Eval).unwrap();
        assert!((p.running_mean.data()[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn single_value_rejected_in_train_mode() {
        let err = batchnorm_normalize(&series(&[1.0]), &params(1.0, 0.0), Mode::Train).unwrap_err();
        assert!(matches!(err, Error::DegenerateBatch(_)));
        assert!(batchnorm_normalize(&series(&[1.0]), &params(1.0, 0.0), Mode::Eval).is_ok());
    }

    #[test]
    fn eval_cache_cannot_be_differentiated() {
        let p = params(1.0, 0.0);
        let (_, cache) = batchnorm_normalize(&series(&[1.0, 2.0]), &p, Mode::Eval).unwrap();
        let err = batchnorm_backward(&cache, &p, &series(&[1.0, 1.0])).err().unwrap();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn zero_grad_out() {
        let p = params(1.5, 0.2);
        let (_, cache) = batchnorm_normalize(&series(&[1.0, 2.0, 4.0]), &p, Mode::Train).unwrap();
        let g = batchnorm_backward(&cache, &p, &series(&[0.0; 3])).unwrap();
        assert!(g.x.data().iter().chain(g.gamma.data()).chain(g.beta.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn frozen_backward_is_a_fixed_affine_map() {
        let mut p = params(2.0, 0.0);
        p.running_var = Tensor::vector(&[4.0 - DEFAULT_EPS]);
        let (_, cache) = batchnorm_forward_frozen(&series(&[1.0]), &p).unwrap();
        let g = batchnorm_backward(&cache, &p, &series(&[3.0])).unwrap();
        assert!((g.x.data()[0] - 3.0).abs() < 1e-12);
    }
}
