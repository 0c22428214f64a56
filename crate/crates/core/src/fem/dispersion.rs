//! Physics-side dispersion relation: N sorted branches ω_i(γ) over a
//! wavenumber grid.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assembly::assemble;
use super::bloch::{apply_bloch_with, BlochReduction};
use super::eigen::{solve_branches_with, EigenRoute};
use super::lanczos::{solve_branches_lanczos, LanczosOptions};
use super::mesh::build_mesh;
use crate::error::{Error, Result};
use crate::material::{LayerGeometry, Material};

/// Eigen-solve strategy used per wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Dense complex Hermitian reference path.
    #[default]
    Dense,
    /// Dense solve through the real 2n embedding.
    DenseEmbedded,
    /// Shift-invert Lanczos on a banded factorization.
    Lanczos,
}

/// Uniform wavenumber grid over (0, max] (or [0, max] with `include_zero`).
pub fn uniform_gamma_grid(count: usize, max: f64, include_zero: bool) -> Vec<f64> {
    match (count, include_zero) {
        (0, _) => Vec::new(),
        (1, true) => vec![0.0],
        (_, true) => (0..count).map(|k| max * k as f64 / (count - 1) as f64).collect(),
        (_, false) => (1..=count).map(|k| max * k as f64 / count as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurves {
    /// Wavenumbers, rad/m, strictly increasing.
    pub gamma: Vec<f64>,
    /// `branches[i][g]` is ω_i(γ_g) in rad/s; ascending in i per column.
    pub branches: Vec<Vec<f64>>,
    pub geometry: LayerGeometry,
    pub material: Material,
}

impl DispersionCurves {
    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn thickness(&self) -> f64 {
        self.geometry.thickness
    }

    pub fn elastic_modulus(&self) -> f64 {
        self.material.elastic_modulus
    }

    /// Checks the sortedness, sign and grid invariants.
    pub fn validate(&self) -> Result<()> {
        if self.gamma.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Contract("gamma grid must be strictly increasing".into()));
        }
        for b in &self.branches {
            if b.len() != self.gamma.len() {
                return Err(Error::Shape("branch length differs from gamma grid".into()));
            }
            if b.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::Contract("branch frequencies must be finite and ≥ 0".into()));
            }
        }
        for g in 0..self.gamma.len() {
            if self.branches.windows(2).any(|p| p[0][g] > p[1][g]) {
                return Err(Error::Contract(format!("branches unsorted at column {g}")));
            }
        }
        Ok(())
    }

    /// Rescales every ω by √(E_new/E_old). Exact for a uniform-modulus layer.
    pub fn scale_stiffness(&self, elastic_modulus: f64) -> Result<Self> {
        let material = self.material.with_modulus(elastic_modulus)?;
        let factor = (elastic_modulus / self.material.elastic_modulus).sqrt();
        Ok(DispersionCurves {
            gamma: self.gamma.clone(),
            branches: self
                .branches
                .iter()
                .map(|b| b.iter().map(|w| w * factor).collect())
                .collect(),
            geometry: self.geometry,
            material,
        })
    }

    /// CSV text: `gamma_rad_per_m,omega_1,...,omega_N`, one row per γ.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma_rad_per_m");
        for i in 1..=self.branch_count() {
            write!(out, ",omega_{i}").unwrap();
        }
        out.push('\n');
        for (g, gamma) in self.gamma.iter().enumerate() {
            write!(out, "{gamma}").unwrap();
            for b in &self.branches {
                write!(out, ",{}", b[g]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv().as_bytes())
    }

    /// Parses the CSV produced by [`to_csv`](Self::to_csv); provenance is supplied
    /// by the caller since the CSV does not carry it.
    pub fn from_csv(text: &str, geometry: LayerGeometry, material: Material) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Contract("empty curves CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"gamma_rad_per_m") {
            return Err(Error::Contract(format!("unexpected curves header {header:?}")));
        }
        let n = cols.len() - 1;
        let mut gamma = Vec::new();
        let mut branches = vec![Vec::new(); n];
        for line in lines {
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Contract(format!("bad number in curves CSV: {e}")))?;
            if vals.len() != n + 1 {
                return Err(Error::Shape(format!(
                    "row has {} fields, expected {}",
                    vals.len(),
                    n + 1
                )));
            }
            gamma.push(vals[0]);
            for (b, v) in branches.iter_mut().zip(&vals[1..]) {
                b.push(*v);
            }
        }
        let curves = DispersionCurves {
            gamma,
            branches,
            geometry,
            material,
        };
        curves.validate()?;
        Ok(curves)
    }
}

/// Assembles the cell once, then solves the Bloch pencil at every γ.
pub fn dispersion_curves(
    geometry: &LayerGeometry,
    material: &Material,
    gamma_grid: &[f64],
    count: usize,
) -> Result<DispersionCurves> {
    dispersion_curves_with(geometry, material, gamma_grid, count, SolverKind::Dense)
}

pub fn dispersion_curves_with(
    geometry: &LayerGeometry,
    material: &Material,
    gamma_grid: &[f64],
    count: usize,
    solver: SolverKind,
) -> Result<DispersionCurves> {
    geometry.validate()?;
    material.validate()?;
    if gamma_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Contract("gamma grid must be strictly increasing".into()));
    }
    let mesh = build_mesh(geometry)?;
    let (k, m) = assemble(&mesh, material)?;
    let reduction = BlochReduction::new(&mesh);
    for &g in gamma_grid {
        reduction.check_wavenumber(g)?;
    }
    let columns: Vec<Vec<f64>> = gamma_grid
        .par_iter()
        .map(|&gamma| match solver {
            SolverKind::Dense | SolverKind::DenseEmbedded => {
                let route = if solver == SolverKind::Dense {
                    EigenRoute::Complex
                } else {
                    EigenRoute::RealEmbedding
                };
                let pencil = apply_bloch_with(&reduction, &k, &m, gamma)?;
                solve_branches_with(&pencil, count, route)
            }
            SolverKind::Lanczos => solve_branches_lanczos(&reduction, &k, &m, gamma, count, &LanczosOptions::default()),
        })
        .collect::<Result<_>>()?;
    let mut branches = vec![Vec::with_capacity(gamma_grid.len()); count];
    for col in &columns {
        for (b, w) in branches.iter_mut().zip(col) {
            b.push(*w);
        }
    }
    Ok(DispersionCurves {
        gamma: gamma_grid.to_vec(),
        branches,
        geometry: *geometry,
        material: *material,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curves(e: f64) -> DispersionCurves {
        let g = LayerGeometry::single_column(0.006, 0.0005).unwrap();
        let m = Material::soft_tissue(e).unwrap();
        let grid = uniform_gamma_grid(8, 1500.0, false);
        dispersion_curves(&g, &m, &grid, 6).unwrap()
    }

    #[test]
    fn grid_helpers() {
        assert_eq!(uniform_gamma_grid(4, 4.0, false), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(uniform_gamma_grid(3, 4.0, true), vec![0.0, 2.0, 4.0]);
        assert!(uniform_gamma_grid(0, 4.0, true).is_empty());
    }

    #[test]
    fn sorted_columns() {
        let c = curves(10e3);
        c.validate().unwrap();
        assert_eq!(c.branch_count(), 6);
    }

    #[test]
    fn scale_identity_and_quadruple() {
        let c = curves(10e3);
        assert_eq!(c.scale_stiffness(10e3).unwrap().branches, c.branches);
        let q = c.scale_stiffness(40e3).unwrap();
        for (a, b) in c.branches.iter().flatten().zip(q.branches.iter().flatten()) {
            assert!((2.0 * a - b).abs() <= 1e-15 * b);
        }
        assert_eq!(q.elastic_modulus(), 40e3);
        assert!(matches!(c.scale_stiffness(0.0), Err(Error::InvalidMaterial(_))));
    }

    #[test]
    fn scaled_equals_direct() {
        let c = curves(10e3).scale_stiffness(17e3).unwrap();
        let d = curves(17e3);
        for (a, b) in c.branches.iter().flatten().zip(d.branches.iter().flatten()) {
            assert!((a - b).abs() <= 1e-10 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = curves(10e3);
        let text = c.to_csv();
        assert!(text.starts_with("gamma_rad_per_m,omega_1,omega_2"));
        let back = DispersionCurves::from_csv(&text, c.geometry, c.material).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_grid() {
        let g = LayerGeometry::single_column(0.006, 0.0005).unwrap();
        let m = Material::soft_tissue(1e4).unwrap();
        assert!(dispersion_curves(&g, &m, &[10.0, 5.0], 2).is_err());
        assert!(matches!(
            dispersion_curves(&g, &m, &[1e6], 2),
            Err(Error::WavenumberOutOfRange { .. })
        ));
    }
}
