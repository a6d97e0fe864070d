//! Stride-1 "same" 1D convolution (cross-correlation, no kernel flip).
//!
//! Computed as im2col followed by one GEMM over the whole batch. The input is
//! zero-padded with `floor((K-1)/2)` samples on the left and the remainder on
//! the right, so even kernel sizes lean one sample towards the future.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{gemm, Mat, MatMut, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    /// `[out_channels, in_channels, kernel_size]`
    pub weights: Tensor,
    /// `[out_channels]`
    pub bias: Tensor,
}

impl ConvParams {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        let (cout, _, _) = weights.dims3("conv weights")?;
        bias.expect_shape(&[cout], "conv bias")?;
        Ok(ConvParams { weights, bias })
    }

    pub fn zeros(out_channels: usize, in_channels: usize, kernel_size: usize) -> Self {
        ConvParams {
            weights: Tensor::zeros(&[out_channels, in_channels, kernel_size]),
            bias: Tensor::zeros(&[out_channels]),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn kernel_size(&self) -> usize {
        self.weights.shape()[2]
    }
}

/// Left padding for kernel size `k`; the right side gets `k - 1 - pad_left(k)`.
pub fn pad_left(k: usize) -> usize {
    (k - 1) / 2
}

pub struct ConvGrads {
    pub x: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

fn check_input(x: &Tensor, p: &ConvParams) -> Result<(usize, usize, usize)> {
    let (b, cin, t) = x.dims3("conv1d input")?;
    if cin != p.in_channels() {
        return Err(Error::dim(format!(
            "conv1d input has {cin} channels, weights {:?} expect {}",
            p.weights.shape(),
            p.in_channels()
        )));
    }
    Ok((b, cin, t))
}

/// Unrolls `x[B×C×T]` into `[C·K × B·T]` so that convolution is one GEMM.
fn im2col(x: &[f64], b: usize, c: usize, t: usize, k: usize) -> Vec<f64> {
    let pl = pad_left(k) as isize;
    let width = b * t;
    let mut cols = vec![0.0; c * k * width];
    for ci in 0..c {
        for ki in 0..k {
            let row = &mut cols[(ci * k + ki) * width..(ci * k + ki + 1) * width];
            let shift = ki as isize - pl;
            // valid output positions: 0 <= ti + shift < t
            let lo = (-shift).max(0) as usize;
            let hi = ((t as isize) - shift).clamp(0, t as isize) as usize;
            if lo >= hi {
                continue;
            }
            for bi in 0..b {
                let src = &x[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                let dst = &mut row[bi * t..(bi + 1) * t];
                let s0 = (lo as isize + shift) as usize;
                dst[lo..hi].copy_from_slice(&src[s0..s0 + (hi - lo)]);
            }
        }
    }
    cols
}

fn col2im(cols: &[f64], b: usize, c: usize, t: usize, k: usize) -> Vec<f64> {
    let pl = pad_left(k) as isize;
    let width = b * t;
    let mut x = vec![0.0; b * c * t];
    for ci in 0..c {
        for ki in 0..k {
            let row = &cols[(ci * k + ki) * width..(ci * k + ki + 1) * width];
            let shift = ki as isize - pl;
            let lo = (-shift).max(0) as usize;
            let hi = ((t as isize) - shift).clamp(0, t as isize) as usize;
            if lo >= hi {
                continue;
            }
            for bi in 0..b {
                let dst = &mut x[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                let src = &row[bi * t..(bi + 1) * t];
                let s0 = (lo as isize + shift) as usize;
                for (d, &g) in dst[s0..s0 + (hi - lo)].iter_mut().zip(&src[lo..hi]) {
                    *d += g;
                }
            }
        }
    }
    x
}

pub fn conv1d_forward(x: &Tensor, p: &ConvParams) -> Result<Tensor> {
    let (b, cin, t) = check_input(x, p)?;
    let (cout, k) = (p.out_channels(), p.kernel_size());
    let cols = im2col(x.data(), b, cin, t, k);
    let width = b * t;
    let mut y = vec![0.0; cout * width];
    gemm(
        cout,
        cin * k,
        width,
        1.0,
        Mat::row_major(p.weights.data(), cin * k),
        Mat::row_major(&cols, width),
        0.0,
        MatMut::row_major(&mut y, width),
    );
    let mut out = vec![0.0; b * cout * t];
    for o in 0..cout {
        let bias = p.bias.data()[o];
        for bi in 0..b {
            let src = &y[o * width + bi * t..o * width + (bi + 1) * t];
            let dst = &mut out[(bi * cout + o) * t..(bi * cout + o + 1) * t];
            for (d, &v) in dst.iter_mut().zip(src) {
                *d = v + bias;
            }
        }
    }
    Tensor::new(vec![b, cout, t], out)
}

pub fn conv1d_backward(x: &Tensor, p: &ConvParams, grad_out: &Tensor) -> Result<ConvGrads> {
    let (b, cin, t) = check_input(x, p)?;
    let (cout, k) = (p.out_channels(), p.kernel_size());
    grad_out.expect_shape(&[b, cout, t], "conv1d grad_out")?;
    let width = b * t;

    // [B×Cout×T] -> [Cout × B·T]
    let mut g = vec![0.0; cout * width];
    let mut grad_b = vec![0.0; cout];
    for bi in 0..b {
        for o in 0..cout {
            let src = &grad_out.data()[(bi * cout + o) * t..(bi * cout + o + 1) * t];
            g[o * width + bi * t..o * width + (bi + 1) * t].copy_from_slice(src);
        }
    }
    for (o, gb) in grad_b.iter_mut().enumerate() {
        *gb = g[o * width..(o + 1) * width].iter().sum();
    }

    let cols = im2col(x.data(), b, cin, t, k);
    let mut grad_w = vec![0.0; cout * cin * k];
    gemm(
        cout,
        width,
        cin * k,
        1.0,
        Mat::row_major(&g, width),
        Mat::transposed(&cols, width),
        0.0,
        MatMut::row_major(&mut grad_w, cin * k),
    );

    let mut grad_cols = vec![0.0; cin * k * width];
    gemm(
        cin * k,
        cout,
        width,
        1.0,
        Mat::transposed(p.weights.data(), cin * k),
        Mat::row_major(&g, width),
        0.0,
        MatMut::row_major(&mut grad_cols, width),
    );
    let grad_x = col2im(&grad_cols, b, cin, t, k);

    Ok(ConvGrads {
        x: Tensor::new(vec![b, cin, t], grad_x)?,
        weights: Tensor::new(vec![cout, cin, k], grad_w)?,
        bias: Tensor::new(vec![cout], grad_b)?,
    })
}
