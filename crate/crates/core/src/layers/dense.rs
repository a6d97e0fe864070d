use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{gemm, matmul, Mat, MatMut, Tensor};

/// Fully connected head: `out = x·W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    /// `[features, classes]`
    pub weights: Tensor,
    /// `[classes]`
    pub bias: Tensor,
}

impl DenseParams {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        let (_, c) = weights.dims2("dense weights")?;
        bias.expect_shape(&[c], "dense bias")?;
        Ok(DenseParams { weights, bias })
    }

    pub fn in_features(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn classes(&self) -> usize {
        self.weights.shape()[1]
    }
}

pub struct DenseGrads {
    pub x: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

fn check(x: &Tensor, p: &DenseParams) -> Result<(usize, usize)> {
    let (b, f) = x.dims2("dense input")?;
    if f != p.in_features() {
        return Err(Error::dim(format!(
            "dense input {:?} does not match weights {:?}",
            x.shape(),
            p.weights.shape()
        )));
    }
    Ok((b, f))
}

pub fn dense_forward(x: &Tensor, p: &DenseParams) -> Result<Tensor> {
    check(x, p)?;
    let mut out = matmul(x, &p.weights)?;
    let c = p.classes();
    for row in out.data_mut().chunks_exact_mut(c) {
        for (o, &b) in row.iter_mut().zip(p.bias.data()) {
            *o += b;
        }
    }
    Ok(out)
}

pub fn dense_backward(x: &Tensor, p: &DenseParams, grad_out: &Tensor) -> Result<DenseGrads> {
    let (b, f) = check(x, p)?;
    let c = p.classes();
    grad_out.expect_shape(&[b, c], "dense grad_out")?;

    let mut grad_x = vec![0.0; b * f];
    gemm(
        b,
        c,
        f,
        1.0,
        Mat::row_major(grad_out.data(), c),
        Mat::transposed(p.weights.data(), c),
        0.0,
        MatMut::row_major(&mut grad_x, f),
    );
    let mut grad_w = vec![0.0; f * c];
    gemm(
        f,
        b,
        c,
        1.0,
        Mat::transposed(x.data(), f),
        Mat::row_major(grad_out.data(), c),
        0.0,
        MatMut::row_major(&mut grad_w, c),
    );
    let mut grad_b = vec![0.0; c];
    for row in grad_out.data().chunks_exact(c) {
        for (gb, &g) in grad_b.iter_mut().zip(row) {
            *gb += g;
        }
    }
    Ok(DenseGrads {
        x: Tensor::new(vec![b, f], grad_x)?,
        weights: Tensor::new(vec![f, c], grad_w)?,
        bias: Tensor::new(vec![c], grad_b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights() {
        let p = DenseParams::new(
            Tensor::matrix(&[&[1.0, 0.0], &[0.0, 1.0]]),
            Tensor::zeros(&[2]),
        )
        .unwrap();
        let x = Tensor::matrix(&[&[3.0, -4.0], &[0.5, 2.0]]);
        assert_eq!(dense_forward(&x, &p).unwrap(), x);
    }

    #[test]
    fn hand_arithmetic() {
        let p = DenseParams::new(Tensor::matrix(&[&[3.0], &[4.0]]), Tensor::vector(&[1.0])).unwrap();
        let y = dense_forward(&Tensor::matrix(&[&[1.0, 2.0]]), &p).unwrap();
        assert_eq!(y.data(), &[12.0]);
    }

    #[test]
    fn backward_hand_case() {
        let p = DenseParams::new(Tensor::matrix(&[&[3.0], &[4.0]]), Tensor::vector(&[1.0])).unwrap();
        let x = Tensor::matrix(&[&[1.0, 2.0]]);
        let g = dense_backward(&x, &p, &Tensor::matrix(&[&[2.0]])).unwrap();
        assert_eq!(g.x.data(), &[6.0, 8.0]);
        assert_eq!(g.weights.data(), &[2.0, 4.0]);
        assert_eq!(g.bias.data(), &[2.0]);
    }

    #[test]
    fn feature_mismatch() {
        let p = DenseParams::new(Tensor::zeros(&[3, 2]), Tensor::zeros(&[2])).unwrap();
        assert!(matches!(
            dense_forward(&Tensor::zeros(&[1, 2]), &p),
            Err(Error::Dimension(_))
        ));
    }
}
