//! Closed-loop harness: simulate, observe, invert.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SearchGrid;
use super::search::{grid_search, EstimationResult, SearchOptions};
use crate::error::{Error, Result};
use crate::field::DisplacementField;
use crate::material::Material;
use crate::motion::{phase_displacements, FilterParams};
use crate::sim::{render_video, sample_surface_with, simulate, Excitation, SimConfig, SurfaceSampling, Texture};
use crate::spectral::{normalize, observed_dispersion_with, DispersionImage, Roi, SpectralOptions};
use crate::video::VideoClip;

/// Rendering and re-extraction of the sampled field through video.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoPath {
    /// Texture grain, pixels.
    pub grain: f64,
    /// Image rows of the rendered clip.
    pub rows: usize,
    pub filter: FilterParams,
}

impl Default for VideoPath {
    fn default() -> Self {
        VideoPath {
            grain: 1.5,
            rows: 24,
            filter: FilterParams::default(),
        }
    }
}

/// One synthetic experiment with known truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub thickness: f64,
    pub material: Material,
    pub excitation: Excitation,
    pub sim: SimConfig,
    pub sampling: SurfaceSampling,
    #[serde(default)]
    pub spectral: SpectralOptions,
    /// Additive white displacement noise, as a fraction of the field RMS.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub video: Option<VideoPath>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for Scenario {
    /// 10 mm layer of 10 kPa soft tissue filmed at 600 fps and 1000 px/m
    /// over a 0.2 m window of a 0.8 m strip.
    fn default() -> Self {
        Scenario {
            thickness: 0.010,
            material: Material::soft_tissue(10e3).expect("valid default material"),
            excitation: Excitation::default(),
            sim: SimConfig {
                strip_length: 0.8,
                ..SimConfig::default()
            },
            sampling: SurfaceSampling::new(1000.0, 600.0, (0.05, 0.25)),
            spectral: SpectralOptions::default(),
            noise: 0.0,
            video: None,
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn with_truth(&self, thickness: f64, elastic_modulus: f64) -> Result<Self> {
        Ok(Scenario {
            thickness,
            material: self.material.with_modulus(elastic_modulus)?,
            ..self.clone()
        })
    }

    /// Simulated surface motion on the camera grid, before any video
    /// round trip or noise.
    pub fn sampled_field(&self) -> Result<DisplacementField> {
        let history = simulate(self.thickness, &self.material, &self.excitation, &self.sim)?;
        sample_surface_with(&history, &self.sampling)
    }

    /// Renders the surface line of `field` onto a seeded random texture.
    pub fn render(&self, field: &DisplacementField, path: &VideoPath) -> Result<VideoClip> {
        let surface = replicate_rows(field, path.rows);
        let texture = Texture::random(path.rows, field.cols, path.grain, self.seed);
        render_video(&surface, &texture)
    }

    /// Sampled (and optionally noised or video round-tripped) field.
    pub fn field(&self) -> Result<DisplacementField> {
        let mut field = self.sampled_field()?;
        if let Some(v) = &self.video {
            field = phase_displacements(&self.render(&field, v)?, &v.filter)?;
        }
        add_noise(&mut field, self.noise, self.seed)?;
        Ok(field)
    }

    /// Raw observed dispersion image of the scenario.
    pub fn observe(&self) -> Result<DispersionImage> {
        observed_dispersion_with(&self.field()?, self.spectral)
    }
}

fn replicate_rows(field: &DisplacementField, rows: usize) -> DisplacementField {
    let mut out = DisplacementField::zeros(rows, field.cols, field.frames, field.ppm, field.fps);
    let n = field.cols * field.frames;
    for r in 0..rows {
        out.u[r * n..(r + 1) * n].copy_from_slice(&field.u[..n]);
        out.v[r * n..(r + 1) * n].copy_from_slice(&field.v[..n]);
    }
    out
}

/// Adds seeded white noise of standard deviation `fraction`·RMS(field).
pub fn add_noise(field: &mut DisplacementField, fraction: f64, seed: u64) -> Result<()> {
    if fraction == 0.0 {
        return Ok(());
    }
    if !(fraction > 0.0 && fraction.is_finite()) {
        return Err(Error::Config(format!("noise fraction must be ≥ 0, got {fraction}")));
    }
    let sd = fraction * field.rms();
    let normal = Normal::new(0.0, sd).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f697365);
    for x in field.u.iter_mut().chain(field.v.iter_mut()) {
        *x += normal.sample(&mut rng);
    }
    field.rebase_to_first_frame();
    Ok(())
}

/// Observation prepared for fitting: cropped to the ROI and normalized.
pub fn prepare(raw: &DispersionImage, roi: &Roi) -> Result<DispersionImage> {
    normalize(&roi.crop(raw)?)
}

/// Simulate, observe, crop, normalize and invert.
pub fn closed_loop(
    scenario: &Scenario,
    roi: &Roi,
    grid: &SearchGrid,
    opts: &SearchOptions,
) -> Result<EstimationResult> {
    grid_search(&prepare(&scenario.observe()?, roi)?, grid, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub true_thickness: f64,
    pub true_stiffness: f64,
    /// (T*, E*) or the failure message of this case.
    pub estimate: std::result::Result<(f64, f64), String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cases: Vec<SweepCase>,
    /// Estimates of the thickness-perturbed cases are non-decreasing in
    /// true thickness (and likewise for stiffness).
    pub thickness_monotone: bool,
    pub stiffness_monotone: bool,
    /// Same checks with distinct estimates required for distinct truths.
    pub thickness_strict: bool,
    pub stiffness_strict: bool,
}

fn ordered(mut pairs: Vec<(f64, f64)>, strict: bool) -> bool {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
        .windows(2)
        .all(|w| if strict { w[0].1 < w[1].1 } else { w[0].1 <= w[1].1 })
}

/// Perturbs T (at base E) and E (at base T) by each fraction and inverts
/// every case on the same grid. Failed cases are recorded and skipped.
pub fn sensitivity_sweep(
    base_thickness: f64,
    base_stiffness: f64,
    perturbations: &[f64],
    template: &Scenario,
    roi: &Roi,
    grid: &SearchGrid,
    opts: &SearchOptions,
) -> Result<SweepReport> {
    if perturbations.iter().any(|p| !(p.abs() < 0.5)) {
        return Err(Error::Config("perturbation fractions must lie in (−0.5, 0.5)".into()));
    }
    let mut truths: Vec<(f64, f64, bool)> = Vec::new();
    for &p in perturbations {
        truths.push((base_thickness * (1.0 + p), base_stiffness, true));
    }
    for &p in perturbations.iter().filter(|&&p| p != 0.0) {
        truths.push((base_thickness, base_stiffness * (1.0 + p), false));
    }
    let cases: Vec<SweepCase> = truths
        .par_iter()
        .map(|&(t, e, _)| SweepCase {
            true_thickness: t,
            true_stiffness: e,
            estimate: template
                .with_truth(t, e)
                .and_then(|s| closed_loop(&s, roi, grid, opts))
                .map(|r| (r.t_star, r.e_star))
                .map_err(|e| e.to_string()),
        })
        .collect();
    let pick = |thick: bool| {
        cases
            .iter()
            .zip(&truths)
            .filter(|(_, tr)| tr.2 == thick || (tr.0 == base_thickness && tr.1 == base_stiffness))
            .filter_map(|(c, _)| {
                c.estimate.as_ref().ok().map(|&(t, e)| {
                    if thick {
                        (c.true_thickness, t)
                    } else {
                        (c.true_stiffness, e)
                    }
                })
            })
            .collect::<Vec<_>>()
    };
    let (by_t, by_e) = (pick(true), pick(false));
    Ok(SweepReport {
        thickness_monotone: ordered(by_t.clone(), false),
        stiffness_monotone: ordered(by_e.clone(), false),
        thickness_strict: ordered(by_t, true),
        stiffness_strict: ordered(by_e, true),
        cases,
    })
}
