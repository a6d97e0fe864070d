//! JSON checkpoints for trained models.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "hyperparameters": { ... },
//!   "label_map": [-1, 1],
//!   "series_length": 24,
//!   "blocks": [{ "name": "block0.conv.weight", "shape": [32, 1, 32], "data": [...] }, ...]
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so a load reproduces every
//! parameter bit for bit and re-saving yields identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::LabelMap;
use crate::error::{Error, Result};
use crate::model::{Hyperparameters, SrdcnnModel};
use crate::tensor::Tensor;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Block {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    format_version: u64,
    hyperparameters: Hyperparameters,
    label_map: Vec<i64>,
    series_length: usize,
    blocks: Vec<Block>,
}

fn named_tensors(model: &SrdcnnModel) -> Vec<(String, &Tensor)> {
    let mut out = Vec::new();
    for (i, b) in model.blocks.iter().enumerate() {
        out.push((format!("block{i}.conv.weight"), &b.conv.weights));
        out.push((format!("block{i}.conv.bias"), &b.conv.bias));
        out.push((format!("block{i}.bn.gamma"), &b.bn.gamma));
        out.push((format!("block{i}.bn.beta"), &b.bn.beta));
        out.push((format!("block{i}.bn.running_mean"), &b.bn.running_mean));
        out.push((format!("block{i}.bn.running_var"), &b.bn.running_var));
    }
    out.push(("dense.weight".into(), &model.dense.weights));
    out.push(("dense.bias".into(), &model.dense.bias));
    out
}

fn named_tensors_mut(model: &mut SrdcnnModel) -> Vec<(String, &mut Tensor)> {
    let mut out = Vec::new();
    for (i, b) in model.blocks.iter_mut().enumerate() {
        out.push((format!("block{i}.conv.weight"), &mut b.conv.weights));
        out.push((format!("block{i}.conv.bias"), &mut b.conv.bias));
        out.push((format!("block{i}.bn.gamma"), &mut b.bn.gamma));
        out.push((format!("block{i}.bn.beta"), &mut b.bn.beta));
        out.push((format!("block{i}.bn.running_mean"), &mut b.bn.running_mean));
        out.push((format!("block{i}.bn.running_var"), &mut b.bn.running_var));
    }
    out.push(("dense.weight".into(), &mut model.dense.weights));
    out.push(("dense.bias".into(), &mut model.dense.bias));
    out
}

pub fn to_json(model: &SrdcnnModel) -> String {
    let ckpt = Checkpoint {
        format_version: FORMAT_VERSION,
        hyperparameters: model.hyperparameters.clone(),
        label_map: model.label_map.labels().to_vec(),
        series_length: model.series_length,
        blocks: named_tensors(model)
            .into_iter()
            .map(|(name, t)| Block {
                name,
                shape: t.shape().to_vec(),
                data: t.data().to_vec(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&ckpt).expect("checkpoint serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<SrdcnnModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Corrupt(e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::Corrupt("missing format_version".into()))?;
    match version.as_u64() {
        Some(FORMAT_VERSION) => {}
        _ => {
            return Err(Error::Incompatible(format!(
                "format_version {version} is not supported (expected {FORMAT_VERSION})"
            )))
        }
    }
    let ckpt: Checkpoint =
        serde_json::from_value(value).map_err(|e| Error::Corrupt(e.to_string()))?;

    let label_map = LabelMap::from_sorted(ckpt.label_map)
        .map_err(|e| Error::Corrupt(e.to_string()))?;
    let classes = label_map.len();
    // A zero-seeded build fixes the architecture; every value is overwritten.
    let mut model = crate::model::build_model(classes, ckpt.series_length, &ckpt.hyperparameters, 0)
        .map_err(|e| Error::Corrupt(format!("inconsistent hyperparameters: {e}")))?;
    model.label_map = label_map;

    let mut slots = named_tensors_mut(&mut model);
    if slots.len() != ckpt.blocks.len() {
        return Err(Error::Corrupt(format!(
            "expected {} parameter blocks, found {}",
            slots.len(),
            ckpt.blocks.len()
        )));
    }
    for ((name, slot), block) in slots.iter_mut().zip(ckpt.blocks) {
        if *name != block.name {
            return Err(Error::Corrupt(format!(
                "expected block {name}, found {}",
                block.name
            )));
        }
        if slot.shape() != block.shape.as_slice() {
            return Err(Error::Corrupt(format!(
                "block {name}: expected shape {:?}, found {:?}",
                slot.shape(),
                block.shape
            )));
        }
        **slot = Tensor::new(block.shape, block.data)
            .map_err(|e| Error::Corrupt(format!("block {name}: {e}")))?;
    }
    Ok(model)
}

pub fn save_model(model: &SrdcnnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SrdcnnModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;

    fn small() -> SrdcnnModel {
        let hp = Hyperparameters {
            num_layers: 2,
            kernel_sizes: vec![3, 2],
            filters: vec![4, 3],
            ..Hyperparameters::default()
        };
        build_model(3, 10, &hp, 11).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let mut m = small();
        m.blocks[0].bn.running_var.data_mut()[1] = 0.1 + 0.2;
        m.dense.bias.data_mut()[0] = -0.0;
        let text = to_json(&m);
        let back = from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn unknown_version_is_incompatible() {
        let text = to_json(&small()).replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        assert!(matches!(from_json(&text), Err(Error::Incompatible(_))));
    }

    #[test]
    fn truncated_is_corrupt() {
        let text = to_json(&small());
        let cut = &text[..text.len() / 2];
        assert!(matches!(from_json(cut), Err(Error::Corrupt(_))));
    }

    #[test]
    fn wrong_shape_is_corrupt() {
        let text = to_json(&small()).replacen("\"shape\": [\n        4,", "\"shape\": [\n        5,", 1);
        assert!(matches!(from_json(&text), Err(Error::Corrupt(_))));
    }
}
