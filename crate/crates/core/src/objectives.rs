//! Hypothesis rasterization and image-similarity scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::DispersionCurves;
use crate::spectral::{axis_position, axis_position_extrapolated, DispersionImage, Normalization};

/// Distances beyond this many σ contribute exactly zero.
const CUTOFF_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterParams {
    /// Curve half-width, pixels.
    pub sigma: f64,
}

impl Default for RasterParams {
    fn default() -> Self {
        RasterParams { sigma: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    #[default]
    Ssim,
    MseNeg,
    Psnr,
    Curve,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::Ssim,
        ObjectiveKind::MseNeg,
        ObjectiveKind::Psnr,
        ObjectiveKind::Curve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Ssim => "ssim",
            ObjectiveKind::MseNeg => "mse-neg",
            ObjectiveKind::Psnr => "psnr",
            ObjectiveKind::Curve => "curve",
        }
    }

    /// Score of a hypothesis against a normalized observation; larger is better.
    pub fn score(self, curves: &DispersionCurves, observed: &DispersionImage, raster: RasterParams) -> Result<f64> {
        match self {
            ObjectiveKind::Curve => curve_objective(curves, observed),
            _ => {
                let hyp = rasterize_like(curves, observed, raster)?;
                match self {
                    ObjectiveKind::Ssim => ssim(&hyp, observed),
                    ObjectiveKind::MseNeg => Ok(-mse(&hyp, observed)?),
                    ObjectiveKind::Psnr => psnr(&hyp, observed),
                    ObjectiveKind::Curve => unreachable!(),
                }
            }
        }
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "mse_neg" && *k == ObjectiveKind::MseNeg))
            .ok_or_else(|| Error::Config(format!("unknown objective {s:?} (ssim, mse-neg, psnr, curve)")))
    }
}

fn segment_dist2(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    qx * qx + qy * qy
}

/// Gaussian tube of width σ (pixels) around every branch polyline, with
/// distances measured in bin-index space.
pub fn rasterize(
    curves: &DispersionCurves,
    gamma: &[f64],
    omega: &[f64],
    params: RasterParams,
) -> Result<DispersionImage> {
    if !(params.sigma > 0.0 && params.sigma.is_finite()) {
        return Err(Error::Config(format!(
            "raster sigma must be positive, got {}",
            params.sigma
        )));
    }
    if curves.gamma.is_empty() || curves.branches.is_empty() {
        return Err(Error::Contract("cannot rasterize empty curves".into()));
    }
    let mut img = DispersionImage::zeros(gamma.to_vec(), omega.to_vec());
    img.validate_axes()?;
    let (ng, nw) = img.shape();
    let gi: Vec<f64> = curves
        .gamma
        .iter()
        .map(|&g| axis_position_extrapolated(gamma, g))
        .collect();
    let cutoff = CUTOFF_SIGMAS * params.sigma;
    let mut d2 = vec![f64::INFINITY; ng * nw];
    for branch in &curves.branches {
        let pts: Vec<(f64, f64)> = gi
            .iter()
            .zip(branch)
            .map(|(&g, &w)| (g, axis_position_extrapolated(omega, w)))
            .collect();
        let segs: Vec<((f64, f64), (f64, f64))> = if pts.len() == 1 {
            vec![(pts[0], pts[0])]
        } else {
            pts.windows(2).map(|s| (s[0], s[1])).collect()
        };
        for (a, b) in segs {
            let g_lo = (a.0.min(b.0) - cutoff).ceil().max(0.0);
            let g_hi = (a.0.max(b.0) + cutoff).floor().min((ng - 1) as f64);
            let w_lo = (a.1.min(b.1) - cutoff).ceil().max(0.0);
            let w_hi = (a.1.max(b.1) + cutoff).floor().min((nw - 1) as f64);
            if g_lo > g_hi || w_lo > w_hi {
                continue;
            }
            for g in g_lo as usize..=g_hi as usize {
                for w in w_lo as usize..=w_hi as usize {
                    let d = segment_dist2((g as f64, w as f64), a, b);
                    let slot = &mut d2[g * nw + w];
                    if d < *slot {
                        *slot = d;
                    }
                }
            }
        }
    }
    let s2 = 2.0 * params.sigma * params.sigma;
    let c2 = cutoff * cutoff;
    for (v, d) in img.values.iter_mut().zip(&d2) {
        *v = if *d <= c2 { (-d / s2).exp() } else { 0.0 };
    }
    if img.values.iter().all(|&v| v == 0.0) {
        log::warn!("rasterized curves fall entirely outside the image axes");
    }
    img.normalization = Normalization::Percentile;
    Ok(img)
}

/// Rasterizes onto the axes of `like`.
pub fn rasterize_like(
    curves: &DispersionCurves,
    like: &DispersionImage,
    params: RasterParams,
) -> Result<DispersionImage> {
    rasterize(curves, &like.gamma, &like.omega, params)
}

fn check_pair(a: &DispersionImage, b: &DispersionImage) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "images {:?} and {:?} differ in shape",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn check_unit_range(img: &DispersionImage) -> Result<()> {
    const TOL: f64 = 1e-12;
    if img.values.iter().any(|v| !(*v >= -TOL && *v <= 1.0 + TOL)) {
        return Err(Error::Contract("SSIM inputs must be normalized to [0, 1]".into()));
    }
    Ok(())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn ssim_kernel() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable 'valid' filtering of a rows×cols image.
fn filter_valid(x: &[f64], rows: usize, cols: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (or, oc) = (rows - n + 1, cols - n + 1);
    let mut tmp = vec![0.0; rows * oc];
    for r in 0..rows {
        for c in 0..oc {
            tmp[r * oc + c] = (0..n).map(|i| k[i] * x[r * cols + c + i]).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for r in 0..or {
        for c in 0..oc {
            out[r * oc + c] = (0..n).map(|i| k[i] * tmp[(r + i) * oc + c]).sum();
        }
    }
    out
}

/// Mean local SSIM, 11×11 Gaussian window (σ = 1.5), R = 1.
pub fn ssim(a: &DispersionImage, b: &DispersionImage) -> Result<f64> {
    check_pair(a, b)?;
    check_unit_range(a)?;
    check_unit_range(b)?;
    let (rows, cols) = a.shape();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::Shape(format!(
            "SSIM needs images of at least {SSIM_WINDOW}×{SSIM_WINDOW}, got {rows}×{cols}"
        )));
    }
    let k = ssim_kernel();
    let (x, y) = (&a.values, &b.values);
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(u, v)| u * v).collect::<Vec<f64>>();
    let mx = filter_valid(x, rows, cols, &k);
    let my = filter_valid(y, rows, cols, &k);
    let sxx = filter_valid(&prod(x, x), rows, cols, &k);
    let syy = filter_valid(&prod(y, y), rows, cols, &k);
    let sxy = filter_valid(&prod(x, y), rows, cols, &k);
    let (c1, c2) = (K1 * K1, K2 * K2);
    let n = mx.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cxy = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / n as f64)
}

pub fn mse(a: &DispersionImage, b: &DispersionImage) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.values.len().max(1) as f64;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        / n)
}

/// 10·log₁₀(1/mse); +∞ for identical images.
pub fn psnr(a: &DispersionImage, b: &DispersionImage) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 { f64::INFINITY } else { -10.0 * m.log10() })
}

/// Cap applied to infinite PSNR in exports, dB.
pub const PSNR_EXPORT_CAP: f64 = 99.0;

/// Σ_i ∫ D_obs(γ, ω_i(γ)) dγ by trapezoids along each branch, densified so
/// every step moves at most half a bin. Points off the axes contribute 0.
pub fn curve_objective(curves: &DispersionCurves, observed: &DispersionImage) -> Result<f64> {
    observed.validate()?;
    let value = |g: f64, w: f64| {
        axis_position(&observed.gamma, g)
            .zip(axis_position(&observed.omega, w))
            .and_then(|(gi, wi)| observed.sample_index(gi, wi))
            .unwrap_or(0.0)
    };
    let pos = |g: f64, w: f64| {
        (
            axis_position_extrapolated(&observed.gamma, g),
            axis_position_extrapolated(&observed.omega, w),
        )
    };
    let mut total = 0.0;
    for branch in &curves.branches {
        for s in 0..curves.gamma.len().saturating_sub(1) {
            let (g0, g1) = (curves.gamma[s], curves.gamma[s + 1]);
            let (w0, w1) = (branch[s], branch[s + 1]);
            let (p0, p1) = (pos(g0, w0), pos(g1, w1));
            let span = (p1.0 - p0.0).abs().max((p1.1 - p0.1).abs());
            let steps = ((span / 0.5).ceil() as usize).clamp(1, 100_000);
            let mut prev = value(g0, w0);
            for k in 1..=steps {
                let t = k as f64 / steps as f64;
                let cur = value(g0 + t * (g1 - g0), w0 + t * (w1 - w0));
                total += 0.5 * (prev + cur) * (g1 - g0) / steps as f64;
                prev = cur;
            }
        }
    }
    Ok(total)
}
