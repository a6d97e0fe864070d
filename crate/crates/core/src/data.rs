//! UCR-archive text files and per-series z-normalization.
//!
//! One instance per line: an integer class label followed by the series
//! values, separated by commas or by runs of whitespace.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Sorted original labels; position in the table is the class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    labels: Vec<i64>,
}

impl LabelMap {
    pub fn from_labels(labels: impl IntoIterator<Item = i64>) -> Self {
        let set: BTreeSet<i64> = labels.into_iter().collect();
        LabelMap {
            labels: set.into_iter().collect(),
        }
    }

    /// Builds from labels already in index order; they must be strictly
    /// increasing.
    pub fn from_sorted(labels: Vec<i64>) -> Result<Self> {
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "label map must be strictly increasing, got {labels:?}"
            )));
        }
        Ok(LabelMap { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: i64) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn label_of(&self, index: usize) -> Option<i64> {
        self.labels.get(index).copied()
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    series: Vec<Vec<f64>>,
    labels: Vec<i64>,
    label_map: LabelMap,
}

impl LabeledDataset {
    pub fn new(series: Vec<Vec<f64>>, labels: Vec<i64>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::Data("dataset has no instances".into()));
        }
        if series.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        let t = series[0].len();
        if t == 0 {
            return Err(Error::Data("series must have at least one value".into()));
        }
        if let Some(i) = series.iter().position(|s| s.len() != t) {
            return Err(Error::Format(format!(
                "instance {i} has length {}, expected {t}",
                series[i].len()
            )));
        }
        let label_map = LabelMap::from_labels(labels.iter().copied());
        Ok(LabeledDataset {
            series,
            labels,
            label_map,
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn series_length(&self) -> usize {
        self.series[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.label_map.len()
    }

    pub fn series(&self) -> &[Vec<f64>] {
        &self.series
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    /// Class indices under this dataset's own label map.
    pub fn class_indices(&self) -> Vec<usize> {
        self.indices_under(&self.label_map)
            .expect("own label map covers every label")
    }

    /// Class indices under another map (e.g. a trained model's).
    pub fn indices_under(&self, map: &LabelMap) -> Result<Vec<usize>> {
        self.labels
            .iter()
            .map(|&l| {
                map.index_of(l)
                    .ok_or_else(|| Error::Data(format!("label {l} is not known to the model")))
            })
            .collect()
    }

    /// Stacks the selected rows into a `[B×1×T]` batch.
    pub fn batch(&self, rows: &[usize]) -> Tensor {
        let t = self.series_length();
        let mut data = Vec::with_capacity(rows.len() * t);
        for &r in rows {
            data.extend_from_slice(&self.series[r]);
        }
        Tensor::new(vec![rows.len(), 1, t], data).expect("rows share one length")
    }

    pub fn znormalized(&self) -> Self {
        LabeledDataset {
            series: self.series.iter().map(|s| znormalize(s)).collect(),
            labels: self.labels.clone(),
            label_map: self.label_map.clone(),
        }
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<(i64, Vec<f64>)> {
    let fields: Vec<&str> = if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    };
    let parse = |s: &str| -> Result<f64> {
        let v: f64 = s.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("not a number: {s:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("non-finite value {s:?}"),
            });
        }
        Ok(v)
    };
    let raw_label = parse(fields[0])?;
    if raw_label.fract() != 0.0 || raw_label.abs() > 2f64.powi(53) {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("label {:?} is not an integer", fields[0]),
        });
    }
    let values = fields[1..].iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Parse {
            line: lineno,
            msg: "instance has a label but no values".into(),
        });
    }
    Ok((raw_label as i64, values))
}

/// Parses UCR-format text. Blank lines are ignored; line numbers in errors
/// are 1-based.
pub fn parse_ucr(text: &str) -> Result<LabeledDataset> {
    let mut series = Vec::new();
    let mut labels = Vec::new();
    let mut expected_len = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, values) = parse_line(line, i + 1)?;
        match expected_len {
            None => expected_len = Some(values.len()),
            Some(t) if t != values.len() => {
                return Err(Error::Format(format!(
                    "line {}: {} values, earlier rows have {t}",
                    i + 1,
                    values.len()
                )))
            }
            _ => {}
        }
        labels.push(label);
        series.push(values);
    }
    if series.is_empty() {
        return Err(Error::Data("no instances in input".into()));
    }
    LabeledDataset::new(series, labels)
}

pub fn load_ucr(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ucr(&text)
}

/// `(x - mean) / std` with population std; near-constant series map to zeros.
pub fn znormalize(series: &[f64]) -> Vec<f64> {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        return vec![0.0; series.len()];
    }
    series.iter().map(|v| (v - mean) / std).collect()
}
