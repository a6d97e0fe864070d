//! Published reference accuracies, shipped as a versioned JSON constants file
//! and kept apart from anything measured here.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

pub const MLP: &str = "MLP";
pub const DTW: &str = "DTW-R1-1NN";
pub const BOSS: &str = "BOSS";
pub const COTE: &str = "COTE";
pub const SRDCNN: &str = "SRDCNN";

/// Column order of the published table.
pub const METHODS: [&str; 5] = [MLP, DTW, BOSS, COTE, SRDCNN];

const TABLE_JSON: &str = include_str!("../data/published_accuracies.json");

#[derive(Debug, Clone, Deserialize)]
pub struct PublishedTable {
    pub version: u32,
    pub source: String,
    pub methods: Vec<String>,
    pub datasets: Vec<PublishedRow>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PublishedRow {
    pub dataset: String,
    pub accuracy: BTreeMap<String, f64>,
    pub citation: BTreeMap<String, String>,
}

impl PublishedRow {
    pub fn get(&self, method: &str) -> Option<f64> {
        self.accuracy.get(method).copied()
    }

    pub fn citation(&self, method: &str) -> &str {
        self.citation.get(method).map(String::as_str).unwrap_or("")
    }

    /// Methods sharing the row maximum.
    pub fn best_methods(&self) -> Vec<&'static str> {
        let best = METHODS
            .iter()
            .filter_map(|m| self.get(m))
            .fold(f64::NEG_INFINITY, f64::max);
        METHODS
            .iter()
            .copied()
            .filter(|m| self.get(m) == Some(best))
            .collect()
    }
}

pub fn table() -> &'static PublishedTable {
    static TABLE: OnceLock<PublishedTable> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(TABLE_JSON).expect("bundled table is valid JSON"))
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Looks a dataset up ignoring case, spaces and punctuation.
pub fn lookup(dataset: &str) -> Option<&'static PublishedRow> {
    let key = normalize(dataset);
    table().datasets.iter().find(|r| normalize(&r.dataset) == key)
}

/// Per-method count of rows where the method is (jointly) best.
pub fn best_counts<'a>(rows: impl IntoIterator<Item = &'a PublishedRow>) -> BTreeMap<&'static str, usize> {
    let mut counts: BTreeMap<&'static str, usize> = METHODS.iter().map(|m| (*m, 0)).collect();
    for row in rows {
        for m in row.best_methods() {
            *counts.get_mut(m).unwrap() += 1;
        }
    }
    counts
}
