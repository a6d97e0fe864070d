//! Dynamic time warping and the 1-nearest-neighbour baseline classifier.
//!
//! The local cost is `(aᵢ − bⱼ)²` accumulated without a final square root.
//! Warping is limited to a Sakoe-Chiba band `|i − j| ≤ ceil(window·max(m, n))`
//! (widened to `|m − n|` so the end cell stays reachable); `window = 1` is
//! the unconstrained setting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtwConfig {
    /// Band width as a fraction of the longer series, in `[0, 1]`.
    pub window: f64,
    /// Squared local cost when set, absolute difference otherwise.
    pub squared: bool,
}

impl Default for DtwConfig {
    fn default() -> Self {
        DtwConfig {
            window: 1.0,
            squared: true,
        }
    }
}

impl DtwConfig {
    pub fn with_window(window: f64) -> Result<Self> {
        let cfg = DtwConfig {
            window,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.window) {
            return Err(Error::Config(format!(
                "dtw window must lie in [0, 1], got {}",
                self.window
            )));
        }
        Ok(())
    }

    fn band(&self, m: usize, n: usize) -> usize {
        let w = (self.window * m.max(n) as f64).ceil() as usize;
        w.max(m.abs_diff(n))
    }
}

pub fn dtw_distance(a: &[f64], b: &[f64], cfg: &DtwConfig) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Data("dtw needs nonempty series".into()));
    }
    cfg.validate()?;
    // Rows run over the longer series so the rolling buffers span the shorter.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let band = cfg.band(long.len(), short.len());
    let cost = |x: f64, y: f64| {
        let d = x - y;
        if cfg.squared {
            d * d
        } else {
            d.abs()
        }
    };

    let n = short.len();
    let mut prev = vec![f64::INFINITY; n];
    let mut cur = vec![f64::INFINITY; n];
    for (i, &x) in long.iter().enumerate() {
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(n - 1);
        cur.fill(f64::INFINITY);
        for j in lo..=hi {
            let c = cost(x, short[j]);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let up = prev[j];
                let left = if j > 0 { cur[j - 1] } else { f64::INFINITY };
                let diag = if j > 0 { prev[j - 1] } else { f64::INFINITY };
                up.min(left).min(diag)
            };
            cur[j] = c + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n - 1])
}

/// Index of the nearest training row; ties go to the lowest row index.
pub fn nearest_neighbor(query: &[f64], train: &LabeledDataset, cfg: &DtwConfig) -> Result<usize> {
    let mut best = (0, f64::INFINITY);
    for (i, s) in train.series().iter().enumerate() {
        let d = dtw_distance(query, s, cfg)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best.0)
}

pub fn nn1_classify(query: &[f64], train: &LabeledDataset, cfg: &DtwConfig) -> Result<i64> {
    Ok(train.labels()[nearest_neighbor(query, train, cfg)?])
}

/// 1-NN test accuracy. Queries are independent, so the parallel schedule
/// cannot change the result.
pub fn baseline_evaluate(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &DtwConfig,
) -> Result<f64> {
    let predicted = baseline_predict(train, test, cfg)?;
    let correct = predicted
        .iter()
        .zip(test.labels())
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / test.len() as f64)
}

pub fn baseline_predict(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &DtwConfig,
) -> Result<Vec<i64>> {
    if train.series_length() != test.series_length() {
        return Err(Error::Data(format!(
            "train series have length {}, test series {}",
            train.series_length(),
            test.series_length()
        )));
    }
    test.series()
        .par_iter()
        .map(|q| nn1_classify(q, train, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> DtwConfig {
        DtwConfig::default()
    }

    #[test]
    fn identical_is_zero() {
        let a = [0.3, -1.0, 2.5, 2.5];
        assert_eq!(dtw_distance(&a, &a, &full()).unwrap(), 0.0);
    }

    #[test]
    fn step_edges_align() {
        let d = dtw_distance(&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0], &full()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn single_cell() {
        assert_eq!(dtw_distance(&[0.0], &[3.0], &full()).unwrap(), 9.0);
        let abs = DtwConfig {
            squared: false,
            ..full()
        };
        assert_eq!(dtw_distance(&[0.0], &[3.0], &abs).unwrap(), 3.0);
    }

    #[test]
    fn zero_window_is_squared_euclidean() {
        let cfg = DtwConfig::with_window(0.0).unwrap();
        let d = dtw_distance(&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0], &cfg).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn unequal_lengths() {
        let d = dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 3.0], &full()).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(
            d,
            dtw_distance(&[1.0, 3.0], &[1.0, 2.0, 3.0], &DtwConfig::with_window(0.0).unwrap())
                .unwrap()
        );
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(dtw_distance(&[], &[1.0], &full()), Err(Error::Data(_))));
    }

    #[test]
    fn bad_window_rejected() {
        assert!(DtwConfig::with_window(1.5).is_err());
    }

    #[test]
    fn single_training_instance_always_wins() {
        let train = LabeledDataset::new(vec![vec![0.0, 1.0]], vec![7]).unwrap();
        assert_eq!(nn1_classify(&[50.0, -3.0], &train, &full()).unwrap(), 7);
    }

    #[test]
    fn ties_go_to_lowest_row() {
        let train =
            LabeledDataset::new(vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.0, 0.0]], vec![2, 1, 1])
                .unwrap();
        assert_eq!(nn1_classify(&[1.0, 1.0], &train, &full()).unwrap(), 2);
    }
}
