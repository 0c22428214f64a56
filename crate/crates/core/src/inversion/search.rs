//! Exhaustive search of the (T, E) grid.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::charnums::{characteristic_numbers, CharNumbers};
use super::grid::SearchGrid;
use crate::error::{Error, Result};
use crate::fem::{dispersion_curves_with, uniform_gamma_grid, DispersionCurves, SolverKind};
use crate::io::png::{write_heatmap, Heatmap};
use crate::material::{LayerGeometry, Material};
use crate::objectives::{ObjectiveKind, RasterParams, PSNR_EXPORT_CAP};
use crate::spectral::{DispersionImage, Normalization};

/// Forward-model settings shared by every grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FemConfig {
    /// Element size e, m.
    pub element_size: f64,
    /// Bloch cell length a, m; one element wide when absent.
    #[serde(default)]
    pub cell_length: Option<f64>,
    pub branches: usize,
    pub gamma_count: usize,
    #[serde(default)]
    pub solver: SolverKind,
    pub poisson_ratio: f64,
    /// kg/m³
    pub density: f64,
}

impl Default for FemConfig {
    fn default() -> Self {
        FemConfig {
            element_size: 0.0005,
            cell_length: None,
            branches: 12,
            gamma_count: 60,
            solver: SolverKind::Dense,
            poisson_ratio: Material::DEFAULT_POISSON,
            density: Material::DEFAULT_DENSITY,
        }
    }
}

impl FemConfig {
    pub fn geometry(&self, thickness: f64) -> Result<LayerGeometry> {
        LayerGeometry::new(
            thickness,
            self.cell_length.unwrap_or(self.element_size),
            self.element_size,
        )
    }

    pub fn material(&self, stiffness: f64) -> Result<Material> {
        Material::new(stiffness, self.poisson_ratio, self.density)
    }

    /// Uniform γ grid over (0, min(π/a, γ_max)].
    pub fn gamma_grid(&self, gamma_max: f64) -> Vec<f64> {
        let a = self.cell_length.unwrap_or(self.element_size);
        uniform_gamma_grid(self.gamma_count, gamma_max.min(std::f64::consts::PI / a), false)
    }

    pub fn curves(&self, thickness: f64, stiffness: f64, gamma: &[f64]) -> Result<DispersionCurves> {
        dispersion_curves_with(
            &self.geometry(thickness)?,
            &self.material(stiffness)?,
            gamma,
            self.branches,
            self.solver,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// One eigen-solve per thickness at the reference stiffness, rescaled per E.
    #[default]
    Scaled,
    /// One eigen-solve per cell.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub objective: ObjectiveKind,
    pub raster: RasterParams,
    pub fem: FemConfig,
    #[serde(default)]
    pub mode: SearchMode,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            objective: ObjectiveKind::Ssim,
            raster: RasterParams::default(),
            fem: FemConfig::default(),
            mode: SearchMode::Scaled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub thickness: Vec<f64>,
    pub stiffness: Vec<f64>,
    /// `scores[i * stiffness.len() + j]` for (thickness[i], stiffness[j]).
    pub scores: Vec<f64>,
    pub objective: ObjectiveKind,
    pub argmax: (usize, usize),
}

impl Landscape {
    /// Builds the landscape and locates the first maximum in row-major
    /// (T, then E) order.
    pub fn new(grid: &SearchGrid, scores: Vec<f64>, objective: ObjectiveKind) -> Result<Self> {
        if scores.len() != grid.cell_count() {
            return Err(Error::Shape("score count does not match the grid".into()));
        }
        if scores.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::Contract("landscape scores must be finite".into()));
        }
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        let ne = grid.stiffness.len();
        Ok(Landscape {
            thickness: grid.thickness.clone(),
            stiffness: grid.stiffness.clone(),
            scores,
            objective,
            argmax: (best / ne, best % ne),
        })
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.stiffness.len() + j]
    }

    pub fn max(&self) -> f64 {
        self.score(self.argmax.0, self.argmax.1)
    }

    pub fn min(&self) -> f64 {
        self.scores.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_flat(&self) -> bool {
        self.scores.iter().all(|&s| s == self.scores[0])
    }

    /// Number of cells scoring at least max − frac·|max|.
    pub fn cells_within(&self, frac: f64) -> usize {
        let m = self.max();
        let floor = m - frac * m.abs();
        self.scores.iter().filter(|&&s| s >= floor).count()
    }

    /// Drop from the maximum to the mean of its (up to four) grid
    /// neighbours, relative to the landscape's range. Zero when flat.
    pub fn sharpness(&self) -> f64 {
        let (i, j) = self.argmax;
        let (nt, ne) = (self.thickness.len() as isize, self.stiffness.len() as isize);
        let nb: Vec<f64> = [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .iter()
            .map(|(di, dj)| (i as isize + di, j as isize + dj))
            .filter(|&(a, b)| a >= 0 && b >= 0 && a < nt && b < ne)
            .map(|(a, b)| self.score(a as usize, b as usize))
            .collect();
        let range = self.max() - self.min();
        if nb.is_empty() || !(range > 0.0) || !range.is_finite() {
            return 0.0;
        }
        (self.max() - nb.iter().sum::<f64>() / nb.len() as f64) / range
    }

    /// `thickness_m,stiffness_pa,score`, one row per cell; infinite PSNR is
    /// written as the export cap.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("thickness_m,stiffness_pa,score\n");
        for (i, t) in self.thickness.iter().enumerate() {
            for (j, e) in self.stiffness.iter().enumerate() {
                let s = self.score(i, j);
                let s = if s == f64::INFINITY { PSNR_EXPORT_CAP } else { s };
                writeln!(out, "{t},{e},{s}").unwrap();
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_csv().as_bytes())
    }

    /// Heatmap with stiffness along x, thickness along y and a crosshair
    /// at the argmax.
    pub fn write_png(&self, path: &Path) -> Result<()> {
        let (nt, ne) = (self.thickness.len(), self.stiffness.len());
        let mut values = vec![0.0; nt * ne];
        for i in 0..nt {
            for j in 0..ne {
                values[j * nt + i] = self.score(i, j).min(PSNR_EXPORT_CAP);
            }
        }
        write_heatmap(
            path,
            &Heatmap {
                values: &values,
                x_axis: &self.stiffness,
                y_axis: &self.thickness,
                marker: Some((self.argmax.1, self.argmax.0)),
                log_scale: false,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    #[serde(rename = "T_star")]
    pub t_star: f64,
    #[serde(rename = "E_star")]
    pub e_star: f64,
    pub objective: ObjectiveKind,
    pub grid: SearchGrid,
    pub char_numbers: Option<CharNumbers>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub landscape: Option<Landscape>,
}

impl EstimationResult {
    pub fn landscape(&self) -> &Landscape {
        self.landscape.as_ref().expect("search results carry their landscape")
    }

    /// Grid indices of the estimate.
    pub fn cell(&self) -> (usize, usize) {
        self.landscape().argmax
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["score"] = serde_json::json!(self.landscape.as_ref().map(|l| l.max().min(PSNR_EXPORT_CAP)));
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// Scores every grid cell against a normalized observation.
pub fn grid_search(observed: &DispersionImage, grid: &SearchGrid, opts: &SearchOptions) -> Result<EstimationResult> {
    observed.validate()?;
    grid.validate()?;
    if observed.normalization != Normalization::Percentile {
        return Err(Error::Contract("grid search needs a normalized observation".into()));
    }
    let gamma = opts.fem.gamma_grid(*observed.gamma.last().expect("validated axis"));
    let ne = grid.stiffness.len();
    let scores: Vec<f64> = match opts.mode {
        SearchMode::Scaled => {
            let e_ref = grid.reference_stiffness();
            let per_t: Vec<DispersionCurves> = grid
                .thickness
                .par_iter()
                .map(|&t| opts.fem.curves(t, e_ref, &gamma))
                .collect::<Result<_>>()?;
            (0..grid.cell_count())
                .into_par_iter()
                .map(|c| {
                    let curves = per_t[c / ne].scale_stiffness(grid.stiffness[c % ne])?;
                    opts.objective.score(&curves, observed, opts.raster)
                })
                .collect::<Result<_>>()?
        }
        SearchMode::Direct => (0..grid.cell_count())
            .into_par_iter()
            .map(|c| {
                let curves = opts
                    .fem
                    .curves(grid.thickness[c / ne], grid.stiffness[c % ne], &gamma)?;
                opts.objective.score(&curves, observed, opts.raster)
            })
            .collect::<Result<_>>()?,
    };
    let landscape = Landscape::new(grid, scores, opts.objective)?;
    let mut warnings = Vec::new();
    if landscape.is_flat() && grid.cell_count() > 1 {
        let msg = "degenerate landscape: every cell has the same score".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let (i, j) = landscape.argmax;
    let (t_star, e_star) = (grid.thickness[i], grid.stiffness[j]);
    let char_numbers = match (observed.meta, observed.energy_centroid()) {
        (Some(m), Some((g, w))) => Some(characteristic_numbers(
            g,
            w,
            m.window_length,
            t_star,
            opts.fem.element_size,
            m.ppm,
            m.fps,
            m.duration,
        )?),
        _ => None,
    };
    Ok(EstimationResult {
        t_star,
        e_star,
        objective: opts.objective,
        grid: grid.clone(),
        char_numbers,
        warnings,
        landscape: Some(landscape),
    })
}
