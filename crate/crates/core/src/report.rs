//! Benchmark reports: published reference accuracies side by side with
//! measured ones, as JSON entries and as an aligned text table.

use serde::{Deserialize, Serialize};

use crate::published::{self, PublishedRow, METHODS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Published,
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub dataset: String,
    pub source: Source,
    pub method: String,
    pub accuracy: f64,
    pub citation: String,
}

/// Accuracies measured for one dataset; either may be absent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasuredRow {
    pub dataset: String,
    pub srdcnn: Option<f64>,
    pub dtw: Option<f64>,
    /// How the measurement was made, e.g. epochs and seeds.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub entries: Vec<ReportEntry>,
    pub text: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.entries).expect("entries serialize");
        s.push('\n');
        s
    }
}

const EMPTY: &str = "—";

pub const COLUMNS: [&str; 8] = [
    "dataset",
    "MLP",
    "DTW-R1-1NN",
    "BOSS",
    "COTE",
    "SRDCNN-published",
    "SRDCNN-measured",
    "DTW-measured",
];

fn cell(v: Option<f64>, best: bool) -> String {
    match v {
        Some(v) if best => format!("{v:.4}*"),
        Some(v) => format!("{v:.4}"),
        None => EMPTY.to_string(),
    }
}

pub fn render_report(results: &[MeasuredRow]) -> Report {
    let mut entries = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut shown: Vec<&PublishedRow> = Vec::new();

    for r in results {
        let published = published::lookup(&r.dataset);
        let name = published.map_or(r.dataset.as_str(), |p| p.dataset.as_str());
        let mut row = vec![name.to_string()];
        match published {
            Some(p) => {
                shown.push(p);
                let best = p.best_methods();
                for m in METHODS {
                    let v = p.get(m);
                    row.push(cell(v, best.contains(&m)));
                    if let Some(acc) = v {
                        entries.push(ReportEntry {
                            dataset: p.dataset.clone(),
                            source: Source::Published,
                            method: m.to_string(),
                            accuracy: acc,
                            citation: p.citation(m).to_string(),
                        });
                    }
                }
            }
            None => row.extend(std::iter::repeat_n(EMPTY.to_string(), METHODS.len())),
        }
        row.push(cell(r.srdcnn, false));
        row.push(cell(r.dtw, false));
        for (method, acc) in [(published::SRDCNN, r.srdcnn), (published::DTW, r.dtw)] {
            if let Some(acc) = acc {
                entries.push(ReportEntry {
                    dataset: name.to_string(),
                    source: Source::Measured,
                    method: method.to_string(),
                    accuracy: acc,
                    citation: format!("measured by this tool; {}", r.note),
                });
            }
        }
        rows.push(row);
    }

    let counts = published::best_counts(shown.iter().copied());
    let mut total = vec!["Total Count".to_string()];
    total.extend(METHODS.iter().map(|m| counts[m].to_string()));
    total.extend([String::new(), String::new()]);

    let header: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
    let all: Vec<&Vec<String>> = std::iter::once(&header).chain(&rows).chain(std::iter::once(&total)).collect();
    let widths: Vec<usize> = (0..COLUMNS.len())
        .map(|c| all.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for r in all {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (s, &w))| {
                let pad = w - s.chars().count();
                if i == 0 {
                    format!("{s}{}", " ".repeat(pad))
                } else {
                    format!("{}{s}", " ".repeat(pad))
                }
            })
            .collect();
        text.push_str(line.join("  ").trim_end());
        text.push('\n');
    }
    text.push_str("* best published accuracy in the row\n");
    Report { entries, text }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_measured_row() {
        let r = render_report(&[MeasuredRow {
            dataset: "ItalyPowerDemand".into(),
            srdcnn: Some(0.96),
            dtw: None,
            note: "test".into(),
        }]);
        let published: Vec<_> = r
            .entries
            .iter()
            .filter(|e| e.source == Source::Published && e.method == "SRDCNN")
            .collect();
        assert_eq!(published.len(), 1);
        assert_eq!(published[0].accuracy, 0.9546);
        assert!(r.text.contains("0.9546"));
        assert!(r.text.contains("0.9703*"));
        // the empty DTW measurement renders as a dash, not 0
        let row = r.text.lines().nth(1).unwrap();
        assert!(row.ends_with('—'), "{row}");
        assert!(!row.contains("0.0000"));
        assert_eq!(r.entries.iter().filter(|e| e.source == Source::Measured).count(), 1);
    }

    #[test]
    fn column_order_is_stable() {
        let r = render_report(&[MeasuredRow {
            dataset: "Coffee".into(),
            ..Default::default()
        }]);
        let header: Vec<&str> = r.text.lines().next().unwrap().split_whitespace().collect();
        assert_eq!(header, COLUMNS);
    }

    #[test]
    fn full_table_tally() {
        let rows: Vec<MeasuredRow> = published::table()
            .datasets
            .iter()
            .map(|d| MeasuredRow {
                dataset: d.dataset.clone(),
                ..Default::default()
            })
            .collect();
        let r = render_report(&rows);
        let total = r.text.lines().find(|l| l.starts_with("Total Count")).unwrap();
        let counts: Vec<&str> = total.split_whitespace().skip(2).collect();
        assert_eq!(counts, ["1", "0", "2", "4", "6"]);
    }

    #[test]
    fn unknown_dataset_has_no_published_values() {
        let r = render_report(&[MeasuredRow {
            dataset: "Toy".into(),
            srdcnn: Some(1.0),
            dtw: Some(0.5),
            note: String::new(),
        }]);
        assert!(r.entries.iter().all(|e| e.source == Source::Measured));
        assert_eq!(r.entries.len(), 2);
    }
}
