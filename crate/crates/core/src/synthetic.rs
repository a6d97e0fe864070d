//! Small generated datasets for smoke tests and demos.

use std::f64::consts::PI;

use crate::data::LabeledDataset;

/// `per_class` sine waves (label 0) and as many square waves (label 1) of
/// amplitude 1, two periods over `len` samples, with evenly spread phases.
/// Rows alternate between the classes.
pub fn sine_square(per_class: usize, len: usize) -> LabeledDataset {
    let mut series = Vec::with_capacity(2 * per_class);
    let mut labels = Vec::with_capacity(2 * per_class);
    for i in 0..per_class {
        let phase = 2.0 * PI * i as f64 / per_class as f64;
        let sine: Vec<f64> = (0..len)
            .map(|t| (4.0 * PI * t as f64 / len as f64 + phase).sin())
            .collect();
        let square = sine.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
        series.push(sine);
        labels.push(0);
        series.push(square);
        labels.push(1);
    }
    LabeledDataset::new(series, labels).expect("generated rows share one length")
}

/// The fixed toy problem: 20 sines against 20 square waves of length 32.
pub fn toy_dataset() -> LabeledDataset {
    sine_square(20, 32)
}
