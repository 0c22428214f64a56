//! Sub-pixel motion from local phase of complex quadrature filters.
//!
//! Each frame is filtered with a Gabor kernel tuned along x (for u) and
//! along y (for v). The phase change of a pixel relative to frame 0,
//! divided by the frame-0 local spatial frequency, is its displacement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::DisplacementField;
use crate::sim::render::blur;
use crate::video::VideoClip;

/// Frame-to-frame phase steps above this magnitude are counted as possible
/// temporal aliasing.
pub const ALIAS_THRESHOLD: f64 = 0.8 * PI;

/// Absolute amplitude below which a clip is considered untextured.
const MIN_TEXTURE_AMPLITUDE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Centre wavelength λ₀, pixels (≥ 4).
    pub center_wavelength: f64,
    /// Half-amplitude bandwidth, octaves.
    pub bandwidth: f64,
    /// Pixels below this fraction of the peak amplitude are filled in.
    pub amplitude_floor: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            center_wavelength: 6.0,
            bandwidth: 1.0,
            amplitude_floor: 0.1,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength >= 4.0 && self.center_wavelength.is_finite()) {
            return Err(Error::Config(format!(
                "filter wavelength must be ≥ 4 px, got {}",
                self.center_wavelength
            )));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::Config("filter bandwidth must be positive".into()));
        }
        if !(self.amplitude_floor > 0.0 && self.amplitude_floor < 1.0) {
            return Err(Error::Config("amplitude floor must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Spatial σ of the Gaussian envelope for the octave bandwidth.
    pub fn sigma(&self) -> f64 {
        let b = 2f64.powf(self.bandwidth);
        self.center_wavelength * (2.0 * 2f64.ln()).sqrt() / (2.0 * PI) * (b + 1.0) / (b - 1.0)
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.center_wavelength
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MotionDiagnostics {
    /// Phase steps above the aliasing threshold, over both orientations.
    pub aliasing_steps: usize,
    /// Fraction of pixels filled in, per orientation (u, v).
    pub filled_fraction: (f64, f64),
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Orientation {
    Horizontal,
    Vertical,
}

struct Kernel {
    along: Vec<Complex64>,
    across: Vec<f64>,
}

fn kernel(params: &FilterParams) -> Kernel {
    let sigma = params.sigma();
    let k0 = params.wavenumber();
    let r = (3.0 * sigma).ceil() as isize;
    let gauss: Vec<f64> = (-r..=r)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let gsum: f64 = gauss.iter().sum();
    // filtering is a correlation, so the carrier is conjugated to keep the
    // response phase increasing along +x
    let raw: Vec<Complex64> = (-r..=r)
        .zip(&gauss)
        .map(|(x, g)| Complex64::from_polar(*g, -k0 * x as f64))
        .collect();
    // remove the DC response so flat regions give no phase
    let dc: Complex64 = raw.iter().sum::<Complex64>() / gsum;
    let along = raw.iter().zip(&gauss).map(|(c, g)| c - dc * g).collect();
    Kernel {
        along,
        across: gauss.iter().map(|g| g / gsum).collect(),
    }
}

/// Separable complex filtering of one row-major frame, edges clamped.
fn filter_frame(img: &[f64], rows: usize, cols: usize, k: &Kernel, o: Orientation) -> Vec<Complex64> {
    let r = (k.along.len() / 2) as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![Complex64::default(); rows * cols];
    let mut out = vec![Complex64::default(); rows * cols];
    match o {
        Orientation::Horizontal => {
            for y in 0..rows {
                for x in 0..cols {
                    tmp[y * cols + x] = (0..k.along.len())
                        .map(|i| k.along[i] * img[y * cols + clamp(x as isize + i as isize - r, cols)])
                        .sum();
                }
            }
            for y in 0..rows {
                for x in 0..cols {
                    out[y * cols + x] = (0..k.across.len())
                        .map(|i| tmp[clamp(y as isize + i as isize - r, rows) * cols + x] * k.across[i])
                        .sum();
                }
            }
        }
        Orientation::Vertical => {
            for y in 0..rows {
                for x in 0..cols {
                    tmp[y * cols + x] = (0..k.along.len())
                        .map(|i| k.along[i] * img[clamp(y as isize + i as isize - r, rows) * cols + x])
                        .sum();
                }
            }
            for y in 0..rows {
                for x in 0..cols {
                    out[y * cols + x] = (0..k.across.len())
                        .map(|i| tmp[y * cols + clamp(x as isize + i as isize - r, cols)] * k.across[i])
                        .sum();
                }
            }
        }
    }
    out
}

struct Displacements {
    /// Pixels, row-major (H, W, F).
    d: Vec<f64>,
    aliasing: usize,
    filled: f64,
}

fn track(video: &VideoClip, params: &FilterParams, o: Orientation) -> Result<Displacements> {
    let (h, w, nf) = (video.rows, video.cols, video.frames);
    let k = kernel(params);
    let k0 = params.wavenumber();
    let responses: Vec<Vec<Complex64>> = (0..nf)
        .into_par_iter()
        .map(|f| filter_frame(&video.frame(f), h, w, &k, o))
        .collect();
    let base = &responses[0];
    let amp: Vec<f64> = base.iter().map(|c| c.norm()).collect();
    let a_max = amp.iter().copied().fold(0.0, f64::max);
    if a_max < MIN_TEXTURE_AMPLITUDE {
        return Err(Error::InsufficientTexture(format!(
            "peak filter amplitude {a_max:.3e} is below the texture threshold"
        )));
    }
    // local spatial frequency of frame 0 along the filter axis
    let (stride, extent) = match o {
        Orientation::Horizontal => (1usize, w),
        Orientation::Vertical => (w, h),
    };
    let freq: Vec<f64> = (0..h * w)
        .map(|p| {
            let pos = if stride == 1 { p % w } else { p / w };
            let (lo, hi) = (
                if pos > 0 { p - stride } else { p },
                if pos + 1 < extent { p + stride } else { p },
            );
            let span = ((hi - lo) / stride) as f64;
            if span == 0.0 {
                return 0.0;
            }
            (base[hi] * base[lo].conj()).arg() / span
        })
        .collect();
    let valid: Vec<bool> = (0..h * w)
        .map(|p| amp[p] >= params.amplitude_floor * a_max && freq[p] > 0.25 * k0 && freq[p] < PI)
        .collect();
    let n_valid = valid.iter().filter(|&&v| v).count();
    if n_valid * 100 < h * w {
        return Err(Error::InsufficientTexture(format!(
            "only {n_valid} of {} pixels have usable filter amplitude",
            h * w
        )));
    }
    let mut d = vec![0.0; h * w * nf];
    let mut aliasing = 0;
    for p in 0..h * w {
        let mut phase = 0.0;
        let mut prev = base[p];
        for f in 1..nf {
            let cur = responses[f][p];
            let step = (cur * prev.conj()).arg();
            if valid[p] && step.abs() > ALIAS_THRESHOLD {
                aliasing += 1;
            }
            phase += step;
            prev = cur;
            d[p * nf + f] = if valid[p] { -phase / freq[p] } else { 0.0 };
        }
    }
    if n_valid < h * w {
        let weight: Vec<f64> = (0..h * w).map(|p| if valid[p] { amp[p] } else { 0.0 }).collect();
        let sigma = params.sigma();
        let den = blur(&weight, h, w, sigma);
        let filled: Vec<Vec<f64>> = (1..nf)
            .into_par_iter()
            .map(|f| {
                let num: Vec<f64> = (0..h * w).map(|p| weight[p] * d[p * nf + f]).collect();
                blur(&num, h, w, sigma)
            })
            .collect();
        for p in (0..h * w).filter(|&p| !valid[p]) {
            for f in 1..nf {
                d[p * nf + f] = if den[p] > 0.0 { filled[f - 1][p] / den[p] } else { 0.0 };
            }
        }
    }
    Ok(Displacements {
        d,
        aliasing,
        filled: 1.0 - n_valid as f64 / (h * w) as f64,
    })
}

/// Displacement field (m) of the clip relative to its first frame.
pub fn phase_displacements(video: &VideoClip, params: &FilterParams) -> Result<DisplacementField> {
    Ok(phase_displacements_with_diagnostics(video, params)?.0)
}

pub fn phase_displacements_with_diagnostics(
    video: &VideoClip,
    params: &FilterParams,
) -> Result<(DisplacementField, MotionDiagnostics)> {
    video.validate()?;
    params.validate()?;
    let du = track(video, params, Orientation::Horizontal)?;
    let dv = track(video, params, Orientation::Vertical)?;
    let mut field = DisplacementField::zeros(video.rows, video.cols, video.frames, video.ppm, video.fps);
    for (x, d) in field.u.iter_mut().zip(&du.d) {
        *x = d / video.ppm;
    }
    // image rows grow downwards
    for (x, d) in field.v.iter_mut().zip(&dv.d) {
        *x = -d / video.ppm;
    }
    let mut diag = MotionDiagnostics {
        aliasing_steps: du.aliasing + dv.aliasing,
        filled_fraction: (du.filled, dv.filled),
        warnings: Vec::new(),
    };
    if diag.aliasing_steps > 0 {
        let msg = format!(
            "{} frame-to-frame phase steps exceed {:.2} rad; motion may be temporally aliased",
            diag.aliasing_steps, ALIAS_THRESHOLD
        );
        log::warn!("{msg}");
        diag.warnings.push(msg);
    }
    Ok((field, diag))
}
