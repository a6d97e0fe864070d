//! Helpers shared by the integration tests: naive reference implementations
//! written independently of the library, data paths and random inputs.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srdcnn::{load_ucr, LabeledDataset, Tensor};

pub const DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");

pub fn data_path(file: &str) -> String {
    format!("{DATA_DIR}/{file}")
}

pub fn italy() -> (LabeledDataset, LabeledDataset) {
    (
        load_ucr(data_path("ItalyPowerDemand_TRAIN.tsv")).unwrap(),
        load_ucr(data_path("ItalyPowerDemand_TEST.tsv")).unwrap(),
    )
}

pub fn coffee() -> (LabeledDataset, LabeledDataset) {
    (
        load_ucr(data_path("Coffee_TRAIN.tsv")).unwrap(),
        load_ucr(data_path("Coffee_TEST.tsv")).unwrap(),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), random_vec(rng, n)).unwrap()
}

/// `k / 2^shift` with `|k| < 2^bits`: few enough significant bits that sums
/// and products of a handful of them are exact in f64.
pub fn dyadic(rng: &mut ChaCha8Rng, bits: u32, shift: i32) -> f64 {
    let k = rng.random_range(-(1i64 << bits) + 1..(1i64 << bits));
    k as f64 * 2f64.powi(-shift)
}

pub fn naive_matmul(a: &[f64], b: &[f64], m: usize, k: usize, p: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * p];
    for i in 0..m {
        for j in 0..p {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i * k + l] * b[l * p + j];
            }
            out[i * p + j] = s;
        }
    }
    out
}

/// Same-padded cross-correlation, left pad `(K-1)/2`, straight from the
/// definition.
pub fn naive_conv1d(x: &Tensor, w: &Tensor, bias: &[f64]) -> Vec<f64> {
    let (b, cin, t) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (cout, k) = (w.shape()[0], w.shape()[2]);
    let left = (k - 1) / 2;
    let (xd, wd) = (x.data(), w.data());
    let mut out = vec![0.0; b * cout * t];
    for n in 0..b {
        for o in 0..cout {
            for pos in 0..t {
                let mut s = bias[o];
                for c in 0..cin {
                    for j in 0..k {
                        let src = pos as isize + j as isize - left as isize;
                        if src >= 0 && (src as usize) < t {
                            s += wd[(o * cin + c) * k + j] * xd[(n * cin + c) * t + src as usize];
                        }
                    }
                }
                out[(n * cout + o) * t + pos] = s;
            }
        }
    }
    out
}

/// Mean over one axis of an arbitrary-rank row-major array, by walking every
/// output multi-index.
pub fn naive_mean_axis(data: &[f64], shape: &[usize], axis: usize) -> Vec<f64> {
    let out_shape: Vec<usize> = shape
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != axis)
        .map(|(_, &d)| d)
        .collect();
    let out_len: usize = out_shape.iter().product();
    let strides: Vec<usize> = (0..shape.len())
        .map(|i| shape[i + 1..].iter().product())
        .collect();
    let mut out = Vec::with_capacity(out_len);
    for flat in 0..out_len {
        let mut rem = flat;
        let mut idx = vec![0; out_shape.len()];
        for i in (0..out_shape.len()).rev() {
            idx[i] = rem % out_shape[i];
            rem /= out_shape[i];
        }
        let mut full = idx.clone();
        full.insert(axis, 0);
        let mut s = 0.0;
        for a in 0..shape[axis] {
            full[axis] = a;
            let off: usize = full.iter().zip(&strides).map(|(i, s)| i * s).sum();
            s += data[off];
        }
        out.push(s / shape[axis] as f64);
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
