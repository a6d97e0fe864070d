//! Sparse-regularized deep 1D convolutional network for univariate
//! time-series classification, written without an ML framework, together
//! with a DTW 1-NN baseline, a finite-difference gradient checker and a
//! benchmark harness.

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod dtw;
pub mod error;
pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod optimizer;
pub mod published;
pub mod regularization;
pub mod report;
pub mod synthetic;
pub mod tensor;

pub use data::{load_ucr, znormalize, LabelMap, LabeledDataset};
pub use error::{Error, Result};
pub use model::{evaluate, train, Hyperparameters, SrdcnnModel, TrainingHistory};
pub use tensor::Tensor;
