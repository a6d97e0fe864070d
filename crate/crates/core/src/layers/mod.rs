//! Forward and backward passes for every layer of the network stack:
//! convolution, batch normalization, ReLU, global average pooling, the dense
//! head and the fused softmax cross-entropy loss.

pub mod batchnorm;
pub mod conv;

mod activation;
mod dense;
mod loss;
mod pooling;

pub use activation::{relu_backward, relu_forward};
pub use batchnorm::{
    batchnorm_backward, batchnorm_forward, batchnorm_forward_frozen, batchnorm_normalize,
    BatchNormParams, BatchStats, BnCache, BnGrads,
};
pub use conv::{conv1d_backward, conv1d_forward, ConvGrads, ConvParams};
pub use dense::{dense_backward, dense_forward, DenseGrads, DenseParams};
pub use loss::{softmax_xent, SoftmaxXent};
pub use pooling::{gap_backward, gap_forward};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}
