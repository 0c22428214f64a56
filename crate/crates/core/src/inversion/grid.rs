use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Candidate thickness (m) and stiffness (Pa) values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub thickness: Vec<f64>,
    pub stiffness: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl SearchGrid {
    pub fn new(thickness: Vec<f64>, stiffness: Vec<f64>) -> Result<Self> {
        let g = SearchGrid { thickness, stiffness };
        g.validate()?;
        Ok(g)
    }

    /// Uniform grids over [lo, hi] with the given counts.
    pub fn uniform(t: (f64, f64, usize), e: (f64, f64, usize)) -> Result<Self> {
        Self::new(linspace(t.0, t.1, t.2), linspace(e.0, e.1, e.2))
    }

    /// `n` values per axis spanning ±`span` (fraction) around the centre.
    pub fn around(thickness: f64, stiffness: f64, span: f64, n: usize) -> Result<Self> {
        Self::uniform(
            (thickness * (1.0 - span), thickness * (1.0 + span), n),
            (stiffness * (1.0 - span), stiffness * (1.0 + span), n),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("thickness", &self.thickness), ("stiffness", &self.stiffness)] {
            if v.is_empty() {
                return Err(Error::Config(format!("{name} grid is empty")));
            }
            if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::Config(format!("{name} grid values must be positive")));
            }
            if v.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config(format!("{name} grid must be strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.thickness.len() * self.stiffness.len()
    }

    /// Geometric mean of the stiffness range.
    pub fn reference_stiffness(&self) -> f64 {
        (self.stiffness[0] * self.stiffness[self.stiffness.len() - 1]).sqrt()
    }

    /// Index of the grid value nearest to `x`.
    pub fn nearest(values: &[f64], x: f64) -> usize {
        (0..values.len())
            .min_by(|&a, &b| (values[a] - x).abs().total_cmp(&(values[b] - x).abs()))
            .unwrap_or(0)
    }
}
