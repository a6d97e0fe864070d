//! Central finite-difference gradient checks for every layer and for the
//! regularized cost of a whole model.
//!
//! Element errors use `|a − n| / max(1e-8, |a| + |n|)`; a block's error is the
//! maximum over its coordinates.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layers::{self, ConvGrads, ConvParams, DenseParams, Mode};
use crate::model::{build_model, Hyperparameters, SrdcnnModel};
use crate::regularization::{elastic_grad, elastic_penalty, PenaltyConfig};
use crate::tensor::Tensor;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_THRESHOLD: f64 = 1e-4;

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-8)
}

/// `(f(θ + h·eᵢ) − f(θ − h·eᵢ)) / 2h` for every coordinate.
pub fn numeric_gradient(
    mut f: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Config(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut theta = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..theta.len() {
        let orig = theta[i];
        theta[i] = orig + h;
        let plus = f(&theta);
        theta[i] = orig - h;
        let minus = f(&theta);
        theta[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!(
                "objective is not finite around coordinate {i}"
            )));
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockError {
    pub name: String,
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradReport {
    pub blocks: Vec<BlockError>,
    pub max_rel_error: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl GradReport {
    fn new(blocks: Vec<BlockError>, threshold: f64) -> Self {
        let max_rel_error = blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max);
        GradReport {
            blocks,
            max_rel_error,
            threshold,
            passed: max_rel_error < threshold,
        }
    }

    /// Merges several reports under name prefixes.
    pub fn combine(parts: Vec<(String, GradReport)>, threshold: f64) -> Self {
        let blocks = parts
            .into_iter()
            .flat_map(|(prefix, r)| {
                r.blocks.into_iter().map(move |mut b| {
                    b.name = format!("{prefix}/{}", b.name);
                    b
                })
            })
            .collect();
        GradReport::new(blocks, threshold)
    }
}

impl fmt::Display for GradReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.blocks.iter().map(|b| b.name.len()).max().unwrap_or(5).max(5);
        writeln!(f, "{:<width$}  {:>12}  {:>7}  {:>7}", "block", "max_rel_err", "checked", "skipped")?;
        for b in &self.blocks {
            writeln!(
                f,
                "{:<width$}  {:>12.3e}  {:>7}  {:>7}",
                b.name, b.max_rel_error, b.checked, b.skipped
            )?;
        }
        write!(
            f,
            "max relative error {:.3e} (threshold {:.1e}): {}",
            self.max_rel_error,
            self.threshold,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares analytic gradients of a scalar function of several parameter
/// blocks against central differences, one block at a time. `skip(block, v)`
/// excludes coordinates (e.g. L1 kinks).
fn compare_blocks(
    names: &[String],
    values: &[Vec<f64>],
    analytic: &[Vec<f64>],
    mut f: impl FnMut(&[Vec<f64>]) -> f64,
    h: f64,
    threshold: f64,
    skip: impl Fn(usize, f64) -> bool,
) -> Result<GradReport> {
    let mut work: Vec<Vec<f64>> = values.to_vec();
    let mut blocks = Vec::with_capacity(names.len());
    for (bi, name) in names.iter().enumerate() {
        let numeric = numeric_gradient(
            |theta| {
                let saved = std::mem::replace(&mut work[bi], theta.to_vec());
                let v = f(&work);
                work[bi] = saved;
                v
            },
            &values[bi],
            h,
        )?;
        let (mut max, mut checked, mut skipped) = (0.0f64, 0, 0);
        for ((&a, &n), &v) in analytic[bi].iter().zip(&numeric).zip(&values[bi]) {
            if skip(bi, v) {
                skipped += 1;
                continue;
            }
            checked += 1;
            max = max.max(relative_error(a, n));
        }
        blocks.push(BlockError {
            name: name.clone(),
            max_rel_error: max,
            checked,
            skipped,
        });
    }
    Ok(GradReport::new(blocks, threshold))
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Values bounded away from zero, for checks across a kink.
fn random_away_from_zero(shape: &[usize], margin: f64, rng: &mut ChaCha8Rng) -> Tensor {
    random_tensor(shape, rng).map(|v| if v >= 0.0 { v + margin } else { v - margin })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub type ConvBackward = dyn Fn(&Tensor, &ConvParams, &Tensor) -> Result<ConvGrads>;

/// Checks a convolution backward implementation on `[2×2×5]` inputs with a
/// kernel of length 3 and one longer than the series.
pub fn check_conv1d_with(
    backward: &ConvBackward,
    seed: u64,
    h: f64,
    threshold: f64,
) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::new();
    for k in [3usize, 7] {
        let x = random_tensor(&[2, 2, 5], &mut rng);
        let p = ConvParams::new(random_tensor(&[3, 2, k], &mut rng), random_tensor(&[3], &mut rng))?;
        let r = random_tensor(&[2, 3, 5], &mut rng);
        let g = backward(&x, &p, &r)?;
        let (xs, ws, bs) = (x.shape().to_vec(), p.weights.shape().to_vec(), p.bias.shape().to_vec());
        let report = compare_blocks(
            &names(&["x", "weights", "bias"]),
            &[x.data().to_vec(), p.weights.data().to_vec(), p.bias.data().to_vec()],
            &[g.x.into_data(), g.weights.into_data(), g.bias.into_data()],
            |v| {
                let x = Tensor::new(xs.clone(), v[0].clone()).unwrap();
                let p = ConvParams::new(
                    Tensor::new(ws.clone(), v[1].clone()).unwrap(),
                    Tensor::new(bs.clone(), v[2].clone()).unwrap(),
                )
                .unwrap();
                dot(layers::conv1d_forward(&x, &p).unwrap().data(), r.data())
            },
            h,
            threshold,
            |_, _| false,
        )?;
        parts.push((format!("k{k}"), report));
    }
    Ok(GradReport::combine(parts, threshold))
}

pub fn check_conv1d(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    check_conv1d_with(&|x, p, g| layers::conv1d_backward(x, p, g), seed, h, threshold)
}

/// Train-mode batch normalization on a `[3×2×4]` batch.
pub fn check_batchnorm(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_tensor(&[3, 2, 4], &mut rng);
    let mut p = layers::BatchNormParams::new(2, 1e-5, 0.1)?;
    p.gamma = random_away_from_zero(&[2], 0.5, &mut rng);
    p.beta = random_tensor(&[2], &mut rng);
    let r = random_tensor(&[3, 2, 4], &mut rng);
    let (_, cache) = layers::batchnorm_normalize(&x, &p, Mode::Train)?;
    let g = layers::batchnorm_backward(&cache, &p, &r)?;
    let xs = x.shape().to_vec();
    compare_blocks(
        &names(&["x", "gamma", "beta"]),
        &[x.data().to_vec(), p.gamma.data().to_vec(), p.beta.data().to_vec()],
        &[g.x.into_data(), g.gamma.into_data(), g.beta.into_data()],
        |v| {
            let mut q = p.clone();
            q.gamma = Tensor::vector(&v[1]);
            q.beta = Tensor::vector(&v[2]);
            let x = Tensor::new(xs.clone(), v[0].clone()).unwrap();
            let (y, _) = layers::batchnorm_normalize(&x, &q, Mode::Train).unwrap();
            dot(y.data(), r.data())
        },
        h,
        threshold,
        |_, _| false,
    )
}

pub fn check_relu(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_away_from_zero(&[2, 3, 4], 100.0 * h, &mut rng);
    let r = random_tensor(&[2, 3, 4], &mut rng);
    let g = layers::relu_backward(&x, &r)?;
    let xs = x.shape().to_vec();
    compare_blocks(
        &names(&["x"]),
        &[x.data().to_vec()],
        &[g.into_data()],
        |v| dot(layers::relu_forward(&Tensor::new(xs.clone(), v[0].clone()).unwrap()).data(), r.data()),
        h,
        threshold,
        |_, _| false,
    )
}

pub fn check_gap(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_tensor(&[2, 3, 5], &mut rng);
    let r = random_tensor(&[2, 3], &mut rng);
    let g = layers::gap_backward(5, &r)?;
    let xs = x.shape().to_vec();
    compare_blocks(
        &names(&["x"]),
        &[x.data().to_vec()],
        &[g.into_data()],
        |v| dot(layers::gap_forward(&Tensor::new(xs.clone(), v[0].clone()).unwrap()).unwrap().data(), r.data()),
        h,
        threshold,
        |_, _| false,
    )
}

pub fn check_dense(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_tensor(&[3, 4], &mut rng);
    let p = DenseParams::new(random_tensor(&[4, 2], &mut rng), random_tensor(&[2], &mut rng))?;
    let r = random_tensor(&[3, 2], &mut rng);
    let g = layers::dense_backward(&x, &p, &r)?;
    compare_blocks(
        &names(&["x", "weights", "bias"]),
        &[x.data().to_vec(), p.weights.data().to_vec(), p.bias.data().to_vec()],
        &[g.x.into_data(), g.weights.into_data(), g.bias.into_data()],
        |v| {
            let x = Tensor::new(vec![3, 4], v[0].clone()).unwrap();
            let p = DenseParams::new(
                Tensor::new(vec![4, 2], v[1].clone()).unwrap(),
                Tensor::vector(&v[2]),
            )
            .unwrap();
            dot(layers::dense_forward(&x, &p).unwrap().data(), r.data())
        },
        h,
        threshold,
        |_, _| false,
    )
}

pub fn check_softmax_xent(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logits = random_tensor(&[2, 3], &mut rng).scale(3.0);
    let labels = [2usize, 0];
    let out = layers::softmax_xent(&logits, &labels)?;
    compare_blocks(
        &names(&["logits"]),
        &[logits.data().to_vec()],
        &[out.grad_logits.into_data()],
        |v| {
            layers::softmax_xent(&Tensor::new(vec![2, 3], v[0].clone()).unwrap(), &labels)
                .unwrap()
                .loss
        },
        h,
        threshold,
        |_, _| false,
    )
}

/// Elastic-net penalty alone, at weights bounded away from the L1 kink.
pub fn check_penalty(seed: u64, cfg: &PenaltyConfig, h: f64, threshold: f64) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = random_away_from_zero(&[16], 20.0 * h, &mut rng);
    compare_blocks(
        &names(&["weights"]),
        &[w.data().to_vec()],
        &[elastic_grad(w.data(), cfg)],
        |v| elastic_penalty(&v[0], cfg),
        h,
        threshold,
        |_, _| false,
    )
}

/// Every layer check, merged into one report.
pub fn check_all_layers(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    let parts = vec![
        ("conv1d".to_string(), check_conv1d(seed, h, threshold)?),
        ("batchnorm".to_string(), check_batchnorm(seed, h, threshold)?),
        ("relu".to_string(), check_relu(seed, h, threshold)?),
        ("gap".to_string(), check_gap(seed, h, threshold)?),
        ("dense".to_string(), check_dense(seed, h, threshold)?),
        ("softmax_xent".to_string(), check_softmax_xent(seed, h, threshold)?),
        (
            "elastic_penalty".to_string(),
            check_penalty(seed, &PenaltyConfig::default(), h, threshold)?,
        ),
    ];
    Ok(GradReport::combine(parts, threshold))
}

/// Gradient of the regularized cost of `model` on one train-mode batch,
/// checked block by block. Coordinates of penalized blocks within `10·h` of
/// zero are skipped when `α₁ > 0`.
pub fn check_model(
    model: &SrdcnnModel,
    batch: &Tensor,
    labels: &[usize],
    cfg: &PenaltyConfig,
    h: f64,
    threshold: f64,
) -> Result<GradReport> {
    let analytic = model.loss_and_grads(batch, labels, cfg)?;
    let values: Vec<Vec<f64>> = model.params().iter().map(|p| p.data().to_vec()).collect();
    let grads: Vec<Vec<f64>> = analytic.grads.iter().map(|g| g.data().to_vec()).collect();
    let mask = model.regularized_mask();
    let mut probe = model.clone();
    compare_blocks(
        &model.param_names(),
        &values,
        &grads,
        |v| {
            for (p, src) in probe.params_mut().into_iter().zip(v) {
                p.data_mut().copy_from_slice(src);
            }
            probe
                .loss_and_grads(batch, labels, cfg)
                .map(|o| o.cost())
                .unwrap_or(f64::NAN)
        },
        h,
        threshold,
        |block, value| cfg.alpha1 > 0.0 && mask[block] && value.abs() < 10.0 * h,
    )
}

/// The tiny end-to-end configuration: 2 classes, length 8, batch of 4,
/// two conv blocks with 2 filters and kernels 3 and 2.
pub fn tiny_problem(seed: u64) -> Result<(SrdcnnModel, Tensor, Vec<usize>)> {
    let hp = Hyperparameters {
        num_layers: 2,
        kernel_sizes: vec![3, 2],
        filters: vec![2, 2],
        seed,
        ..Hyperparameters::default()
    };
    let mut model = build_model(2, 8, &hp, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    // move BN affine parameters and biases off their initial values so every
    // pathway carries a nontrivial gradient
    for p in model.params_mut() {
        if p.rank() == 1 {
            for v in p.data_mut() {
                *v += rng.random_range(-0.5..0.5);
            }
        }
    }
    let batch = random_tensor(&[4, 1, 8], &mut rng);
    Ok((model, batch, vec![0, 1, 1, 0]))
}

pub fn check_tiny_model(seed: u64, h: f64, threshold: f64) -> Result<GradReport> {
    let (model, batch, labels) = tiny_problem(seed)?;
    check_model(&model, &batch, &labels, &PenaltyConfig::default(), h, threshold)
}
