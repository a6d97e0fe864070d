//! L1, L2 and combined elastic-net weight penalties.
//!
//! Values are unscaled for [`l1_penalty`] and [`l2_penalty`]; the elastic
//! penalty applies the two factors:
//!
//! ```text
//! Ω(ω) = α₁·Σ|ωᵢ| + α₂·ωᵀω/2
//! ∂Ω/∂ωᵢ = α₁·sign(ωᵢ) + α₂·ωᵢ      (sign(0) = 0)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA1: f64 = 0.01;
pub const DEFAULT_ALPHA2: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// L1 factor α₁.
    pub alpha1: f64,
    /// L2 factor α₂.
    pub alpha2: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            alpha1: DEFAULT_ALPHA1,
            alpha2: DEFAULT_ALPHA2,
        }
    }
}

impl PenaltyConfig {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        let cfg = PenaltyConfig { alpha1, alpha2 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn none() -> Self {
        PenaltyConfig {
            alpha1: 0.0,
            alpha2: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 >= 0.0 && self.alpha1.is_finite()) {
            return Err(Error::Config(format!("alpha1 must be >= 0, got {}", self.alpha1)));
        }
        if !(self.alpha2 >= 0.0 && self.alpha2.is_finite()) {
            return Err(Error::Config(format!("alpha2 must be >= 0, got {}", self.alpha2)));
        }
        Ok(())
    }
}

/// `ωᵀω / 2`
pub fn l2_penalty(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>() / 2.0
}

/// `Σ|ωᵢ|`
pub fn l1_penalty(w: &[f64]) -> f64 {
    w.iter().map(|v| v.abs()).sum()
}

pub fn elastic_penalty(w: &[f64], cfg: &PenaltyConfig) -> f64 {
    cfg.alpha1 * l1_penalty(w) + cfg.alpha2 * l2_penalty(w)
}

/// Sign with `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn elastic_grad(w: &[f64], cfg: &PenaltyConfig) -> Vec<f64> {
    w.iter()
        .map(|&v| cfg.alpha1 * sign(v) + cfg.alpha2 * v)
        .collect()
}

/// Adds the elastic gradient into an existing gradient buffer.
pub fn add_elastic_grad(w: &[f64], grad: &mut [f64], cfg: &PenaltyConfig) {
    debug_assert_eq!(w.len(), grad.len());
    for (g, &v) in grad.iter_mut().zip(w) {
        *g += cfg.alpha1 * sign(v) + cfg.alpha2 * v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: PenaltyConfig = PenaltyConfig {
        alpha1: 0.01,
        alpha2: 0.02,
    };

    #[test]
    fn l2_values() {
        assert_eq!(l2_penalty(&[0.0, 0.0]), 0.0);
        assert_eq!(l2_penalty(&[1.0, -2.0]), 2.5);
        assert_eq!(l2_penalty(&[3.0]), 4.5);
    }

    #[test]
    fn l1_values() {
        assert_eq!(l1_penalty(&[0.0, 0.0]), 0.0);
        assert_eq!(l1_penalty(&[1.0, -2.0]), 3.0);
        assert_eq!(l1_penalty(&[-3.0]), 3.0);
    }

    #[test]
    fn elastic_values() {
        assert_eq!(elastic_penalty(&[0.0; 5], &CFG), 0.0);
        assert!((elastic_penalty(&[1.0, -2.0], &CFG) - 0.08).abs() < 1e-15);
        assert_eq!(elastic_penalty(&[4.0, -1.0], &PenaltyConfig::none()), 0.0);
    }

    #[test]
    fn elastic_gradient_values() {
        assert_eq!(elastic_grad(&[0.0], &CFG), vec![0.0]);
        let g = elastic_grad(&[1.0, -2.0], &CFG);
        assert!((g[0] - 0.03).abs() < 1e-15);
        assert!((g[1] + 0.05).abs() < 1e-15);
        let w = [0.7, -1.3, 2.0];
        let pure_l2 = PenaltyConfig::new(0.0, 0.02).unwrap();
        let g = elastic_grad(&w, &pure_l2);
        for (gi, wi) in g.iter().zip(w) {
            assert_eq!(*gi, 0.02 * wi);
        }
    }

    #[test]
    fn negative_factor_rejected() {
        assert!(PenaltyConfig::new(-0.1, 0.0).is_err());
        assert!(PenaltyConfig::new(0.0, f64::NAN).is_err());
    }
}
