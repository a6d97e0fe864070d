use crate::error::{Error, Result};
use crate::tensor::{mean_axis, Tensor};

/// Global average pooling over time: `[B×C×T] -> [B×C]`.
pub fn gap_forward(x: &Tensor) -> Result<Tensor> {
    x.dims3("gap input")?;
    mean_axis(x, 2)
}

/// Spreads `grad_out[b][c] / T` uniformly over the `T` time steps.
pub fn gap_backward(t: usize, grad_out: &Tensor) -> Result<Tensor> {
    if t == 0 {
        return Err(Error::dim("gap_backward needs T >= 1"));
    }
    let (b, c) = grad_out.dims2("gap grad_out")?;
    let mut data = Vec::with_capacity(b * c * t);
    for &g in grad_out.data() {
        data.extend(std::iter::repeat_n(g / t as f64, t));
    }
    Tensor::new(vec![b, c, t], data)
}
