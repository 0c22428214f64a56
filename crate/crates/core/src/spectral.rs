//! Observed dispersion images: row-wise 2D FFT magnitudes of a
//! displacement field, folded onto non-negative (γ, ω).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::DisplacementField;
use crate::io::container::{Container, ContainerHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    Raw,
    /// Scaled by the 99.9th percentile and clipped to [0, 1].
    Percentile,
}

/// Magnitudes over (γ, ω) bins; `values[g * omega.len() + w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionImage {
    /// rad/m, strictly increasing.
    pub gamma: Vec<f64>,
    /// rad/s, strictly increasing.
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    /// Sampling of the field the image came from, when known.
    pub meta: Option<ObservationMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationMeta {
    pub ppm: f64,
    pub fps: f64,
    /// Window length W/ppm, m.
    pub window_length: f64,
    /// Observation time F/fps, s.
    pub duration: f64,
}

impl ObservationMeta {
    pub fn of(field: &DisplacementField) -> Self {
        ObservationMeta {
            ppm: field.ppm,
            fps: field.fps,
            window_length: field.window_length(),
            duration: field.duration(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Hann taper along time.
    #[serde(default)]
    pub hann_time: bool,
    /// Hann taper along x.
    #[serde(default)]
    pub hann_space: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Horizontal,
    Vertical,
}

impl DispersionImage {
    pub fn zeros(gamma: Vec<f64>, omega: Vec<f64>) -> Self {
        let n = gamma.len() * omega.len();
        DispersionImage {
            gamma,
            omega,
            values: vec![0.0; n],
            normalization: Normalization::Raw,
            meta: None,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.gamma.len(), self.omega.len())
    }

    #[inline]
    pub fn at(&self, g: usize, w: usize) -> f64 {
        self.values[g * self.omega.len() + w]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// (g, w) of the largest value; first in row-major order on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        (best / self.omega.len(), best % self.omega.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.gamma.len() * self.omega.len() {
            return Err(Error::Shape("image values do not match its axes".into()));
        }
        self.validate_axes()?;
        if self.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Contract("image values must be finite and ≥ 0".into()));
        }
        Ok(())
    }

    pub(crate) fn validate_axes(&self) -> Result<()> {
        for (name, axis) in [("gamma", &self.gamma), ("omega", &self.omega)] {
            if axis.is_empty() || axis.windows(2).any(|w| !(w[0] < w[1])) || axis[0] < 0.0 {
                return Err(Error::Contract(format!(
                    "{name} axis must be non-negative and strictly increasing"
                )));
            }
        }
        Ok(())
    }

    /// Magnitude-weighted mean (γ, ω) excluding the zero row and column.
    pub fn energy_centroid(&self) -> Option<(f64, f64)> {
        let (mut s, mut sg, mut sw) = (0.0, 0.0, 0.0);
        for (g, &gamma) in self.gamma.iter().enumerate() {
            for (w, &omega) in self.omega.iter().enumerate() {
                if gamma == 0.0 || omega == 0.0 {
                    continue;
                }
                let v = self.at(g, w);
                s += v;
                sg += v * gamma;
                sw += v * omega;
            }
        }
        (s > 0.0).then(|| (sg / s, sw / s))
    }

    /// Sub-image over the inclusive index ranges.
    pub fn crop(&self, g: std::ops::Range<usize>, w: std::ops::Range<usize>) -> Result<Self> {
        if g.is_empty() || w.is_empty() || g.end > self.gamma.len() || w.end > self.omega.len() {
            return Err(Error::Range(format!("crop {g:?}×{w:?} outside {:?}", self.shape())));
        }
        let mut out = DispersionImage::zeros(self.gamma[g.clone()].to_vec(), self.omega[w.clone()].to_vec());
        out.normalization = self.normalization;
        out.meta = self.meta;
        let nw = out.omega.len();
        for (i, gi) in g.enumerate() {
            for (j, wj) in w.clone().enumerate() {
                out.values[i * nw + j] = self.at(gi, wj);
            }
        }
        Ok(out)
    }

    pub fn to_container(&self) -> Container {
        let mut header = ContainerHeader::new(vec![self.gamma.len(), self.omega.len()], &["magnitude"]);
        header.axes = BTreeMap::from([
            ("gamma".to_string(), self.gamma.clone()),
            ("omega".to_string(), self.omega.clone()),
        ]);
        header.units = BTreeMap::from([
            ("gamma".to_string(), "rad/m".to_string()),
            ("omega".to_string(), "rad/s".to_string()),
        ]);
        let tag = match self.normalization {
            Normalization::Raw => "raw",
            Normalization::Percentile => "percentile",
        };
        header.attrs.insert("normalization".into(), tag.into());
        if let Some(m) = self.meta {
            header.ppm = Some(m.ppm);
            header.fps = Some(m.fps);
            header
                .attrs
                .insert("window_length_m".into(), m.window_length.to_string());
            header.attrs.insert("duration_s".into(), m.duration.to_string());
        }
        Container {
            header,
            payloads: vec![self.values.clone()],
        }
    }

    pub fn from_container(c: Container, path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let gamma = c
            .header
            .axes
            .get("gamma")
            .ok_or_else(|| bad("missing gamma axis"))?
            .clone();
        let omega = c
            .header
            .axes
            .get("omega")
            .ok_or_else(|| bad("missing omega axis"))?
            .clone();
        if c.header.shape != [gamma.len(), omega.len()] {
            return Err(bad("shape does not match the axes"));
        }
        let normalization = match c.header.attrs.get("normalization").map(String::as_str) {
            None | Some("raw") => Normalization::Raw,
            Some("percentile") => Normalization::Percentile,
            Some(other) => return Err(bad(&format!("unknown normalization {other:?}"))),
        };
        let values = c
            .field("magnitude")
            .ok_or_else(|| bad("missing magnitude field"))?
            .to_vec();
        let attr = |k: &str| c.header.attrs.get(k).and_then(|v| v.parse::<f64>().ok());
        let meta = match (c.header.ppm, c.header.fps, attr("window_length_m"), attr("duration_s")) {
            (Some(ppm), Some(fps), Some(window_length), Some(duration)) => Some(ObservationMeta {
                ppm,
                fps,
                window_length,
                duration,
            }),
            _ => None,
        };
        let img = DispersionImage {
            gamma,
            omega,
            values,
            normalization,
            meta,
        };
        img.validate().map_err(|e| bad(&e.to_string()))?;
        Ok(img)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_container(Container::read(path)?, path)
    }
}

fn hann(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

struct RowTransform {
    cols: usize,
    frames: usize,
    fft_t: std::sync::Arc<dyn rustfft::Fft<f64>>,
    fft_x: std::sync::Arc<dyn rustfft::Fft<f64>>,
    win_t: Option<Vec<f64>>,
    win_x: Option<Vec<f64>>,
}

impl RowTransform {
    fn new(cols: usize, frames: usize, opts: SpectralOptions) -> Self {
        let mut planner = FftPlanner::new();
        RowTransform {
            cols,
            frames,
            fft_t: planner.plan_fft_forward(frames),
            fft_x: planner.plan_fft_forward(cols),
            win_t: opts.hann_time.then(|| hann(frames)),
            win_x: opts.hann_space.then(|| hann(cols)),
        }
    }

    /// Full W×F spectrum of one detrended row, `out[k * F + l]`.
    fn spectrum(&self, data: &[f64]) -> Vec<Complex64> {
        let (w, f) = (self.cols, self.frames);
        let mut buf = vec![Complex64::default(); w * f];
        for c in 0..w {
            let series = &data[c * f..(c + 1) * f];
            let mean = series.iter().sum::<f64>() / f as f64;
            let wx = self.win_x.as_ref().map_or(1.0, |h| h[c]);
            for (t, &x) in series.iter().enumerate() {
                let wt = self.win_t.as_ref().map_or(1.0, |h| h[t]);
                buf[c * f + t] = Complex64::new((x - mean) * wx * wt, 0.0);
            }
        }
        self.fft_t.process(&mut buf);
        let mut col = vec![Complex64::default(); w];
        for l in 0..f {
            for c in 0..w {
                col[c] = buf[c * f + l];
            }
            self.fft_x.process(&mut col);
            for k in 0..w {
                buf[k * f + l] = col[k];
            }
        }
        buf
    }
}

fn check_field(field: &DisplacementField) -> Result<()> {
    field.validate()?;
    if field.cols < 4 || field.frames < 4 {
        return Err(Error::InsufficientSamples(format!(
            "need W ≥ 4 and F ≥ 4, got W={} F={}",
            field.cols, field.frames
        )));
    }
    Ok(())
}

/// Full complex 2D spectrum of one detrended row (`[k * F + l]`, k over x
/// and l over t), without folding.
pub fn row_spectrum(field: &DisplacementField, row: usize, component: Component) -> Result<Vec<Complex64>> {
    check_field(field)?;
    if row >= field.rows {
        return Err(Error::Range(format!("row {row} outside 0..{}", field.rows)));
    }
    let data = match component {
        Component::Horizontal => &field.u,
        Component::Vertical => &field.v,
    };
    let n = field.cols * field.frames;
    let tr = RowTransform::new(field.cols, field.frames, SpectralOptions::default());
    Ok(tr.spectrum(&data[row * n..(row + 1) * n]))
}

/// Physical axes of the folded spectrum: γ_k = 2πk·ppm/W, ω_l = 2πl·fps/F.
pub fn spectral_axes(cols: usize, frames: usize, ppm: f64, fps: f64) -> (Vec<f64>, Vec<f64>) {
    let dg = 2.0 * PI * ppm / cols as f64;
    let dw = 2.0 * PI * fps / frames as f64;
    (
        (0..=cols / 2).map(|k| k as f64 * dg).collect(),
        (0..=frames / 2).map(|l| l as f64 * dw).collect(),
    )
}

pub fn observed_dispersion(field: &DisplacementField) -> Result<DispersionImage> {
    observed_dispersion_with(field, SpectralOptions::default())
}

/// D_obs = (1/2H) Σ_rows (|û| + |v̂|), with the ±γ halves of ω ≥ 0 summed.
pub fn observed_dispersion_with(field: &DisplacementField, opts: SpectralOptions) -> Result<DispersionImage> {
    check_field(field)?;
    let (w, f) = (field.cols, field.frames);
    let (gamma, omega) = spectral_axes(w, f, field.ppm, field.fps);
    let (bg, bw) = (gamma.len(), omega.len());
    let tr = RowTransform::new(w, f, opts);
    let n = w * f;
    let fold = |spec: &[Complex64], acc: &mut [f64]| {
        for k in 0..bg {
            let mirror = (w - k) % w;
            for l in 0..bw {
                let mut v = spec[k * f + l].norm();
                if mirror != k {
                    v += spec[mirror * f + l].norm();
                }
                acc[k * bw + l] += v;
            }
        }
    };
    let rows: Vec<Vec<f64>> = (0..field.rows)
        .into_par_iter()
        .map(|r| {
            let mut acc = vec![0.0; bg * bw];
            for data in [&field.u, &field.v] {
                fold(&tr.spectrum(&data[r * n..(r + 1) * n]), &mut acc);
            }
            acc
        })
        .collect();
    // summed in row order so results do not depend on scheduling
    let mut acc = vec![0.0; bg * bw];
    for row in rows {
        acc.iter_mut().zip(row).for_each(|(x, y)| *x += y);
    }
    let scale = 1.0 / (2.0 * field.rows as f64);
    Ok(DispersionImage {
        gamma,
        omega,
        values: acc.into_iter().map(|v| v * scale).collect(),
        normalization: Normalization::Raw,
        meta: Some(ObservationMeta::of(field)),
    })
}

/// Fractional index of `x` on a monotone axis, `None` outside it.
pub(crate) fn axis_position(axis: &[f64], x: f64) -> Option<f64> {
    let n = axis.len();
    let tol = 1e-9 * (axis[n - 1] - axis[0]).abs().max(f64::MIN_POSITIVE);
    if n == 1 {
        return ((x - axis[0]).abs() <= tol.max(1e-12 * axis[0].abs())).then_some(0.0);
    }
    if x < axis[0] - tol || x > axis[n - 1] + tol {
        return None;
    }
    let x = x.clamp(axis[0], axis[n - 1]);
    let i = axis.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
    Some(i as f64 + (x - axis[i]) / (axis[i + 1] - axis[i]))
}

/// Fractional index of `x` on a monotone axis, extrapolating linearly
/// from the end bins outside it.
pub(crate) fn axis_position_extrapolated(axis: &[f64], x: f64) -> f64 {
    let n = axis.len();
    if n == 1 {
        return 0.0;
    }
    let i = axis.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
    i as f64 + (x - axis[i]) / (axis[i + 1] - axis[i])
}

impl DispersionImage {
    /// Bilinear value at fractional bin indices; `None` outside the grid.
    pub fn sample_index(&self, gi: f64, wi: f64) -> Option<f64> {
        let (ng, nw) = self.shape();
        let eps = 1e-9;
        if !(gi >= -eps && wi >= -eps && gi <= (ng - 1) as f64 + eps && wi <= (nw - 1) as f64 + eps) {
            return None;
        }
        let gi = gi.clamp(0.0, (ng - 1) as f64);
        let wi = wi.clamp(0.0, (nw - 1) as f64);
        let g0 = (gi.floor() as usize).min(ng.saturating_sub(2));
        let w0 = (wi.floor() as usize).min(nw.saturating_sub(2));
        let g1 = (g0 + 1).min(ng - 1);
        let w1 = (w0 + 1).min(nw - 1);
        let (fg, fw) = (gi - g0 as f64, wi - w0 as f64);
        Some(
            (self.at(g0, w0) * (1.0 - fw) + self.at(g0, w1) * fw) * (1.0 - fg)
                + (self.at(g1, w0) * (1.0 - fw) + self.at(g1, w1) * fw) * fg,
        )
    }

    /// Bilinear value at physical (γ, ω); `None` outside the axes.
    pub fn sample(&self, gamma: f64, omega: f64) -> Option<f64> {
        let gi = axis_position(&self.gamma, gamma)?;
        let wi = axis_position(&self.omega, omega)?;
        self.sample_index(gi, wi)
    }
}

/// Bilinear resampling onto new axes that lie inside the source axes.
pub fn regrid(image: &DispersionImage, gamma: &[f64], omega: &[f64]) -> Result<DispersionImage> {
    image.validate()?;
    let gi: Vec<f64> = gamma
        .iter()
        .map(|&g| {
            axis_position(&image.gamma, g).ok_or_else(|| Error::Range(format!("γ = {g} outside the source axis")))
        })
        .collect::<Result<_>>()?;
    let wi: Vec<f64> = omega
        .iter()
        .map(|&w| {
            axis_position(&image.omega, w).ok_or_else(|| Error::Range(format!("ω = {w} outside the source axis")))
        })
        .collect::<Result<_>>()?;
    let mut out = DispersionImage::zeros(gamma.to_vec(), omega.to_vec());
    out.normalization = image.normalization;
    out.meta = image.meta;
    for (a, &g) in gi.iter().enumerate() {
        for (b, &w) in wi.iter().enumerate() {
            out.values[a * omega.len() + b] = image.sample_index(g, w).expect("positions are in range");
        }
    }
    out.validate()?;
    Ok(out)
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub const NORMALIZE_PERCENTILE: f64 = 99.9;

/// Divides by the 99.9th-percentile value (the maximum if that is zero)
/// and clips to [0, 1].
pub fn normalize(image: &DispersionImage) -> Result<DispersionImage> {
    image.validate()?;
    let max = image.max();
    if max <= 0.0 {
        return Err(Error::Degenerate("cannot normalize an all-zero image".into()));
    }
    let p = percentile(&image.values, NORMALIZE_PERCENTILE);
    let scale = if p > 0.0 { p } else { max };
    Ok(DispersionImage {
        gamma: image.gamma.clone(),
        omega: image.omega.clone(),
        values: image.values.iter().map(|v| (v / scale).min(1.0)).collect(),
        normalization: Normalization::Percentile,
        meta: image.meta,
    })
}

/// Observation region used for fitting: the native bins inside
/// [γ_min, γ_max] × [ω_min, ω_max], zero row and column excluded,
/// optionally resampled onto a uniform grid of `bins` (γ, ω) points
/// spanning the same bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(default)]
    pub bins: Option<(usize, usize)>,
}

impl Default for Roi {
    /// Desk-scale fit region: γ ≤ 900 rad/m, 30–205 Hz, on a 128×128 grid.
    fn default() -> Self {
        Roi {
            gamma_min: 0.0,
            gamma_max: 900.0,
            omega_min: 2.0 * PI * 30.0,
            omega_max: 2.0 * PI * 205.0,
            bins: Some((128, 128)),
        }
    }
}

impl Roi {
    pub fn crop(&self, image: &DispersionImage) -> Result<DispersionImage> {
        let idx = |axis: &[f64], lo: f64, hi: f64| {
            let r: Vec<usize> = (0..axis.len())
                .filter(|&i| axis[i] > 0.0 && axis[i] >= lo && axis[i] <= hi)
                .collect();
            match (r.first(), r.last()) {
                (Some(&a), Some(&b)) => Ok(a..b + 1),
                _ => Err(Error::Range(format!("no bins inside [{lo}, {hi}]"))),
            }
        };
        let g = idx(&image.gamma, self.gamma_min, self.gamma_max)?;
        let w = idx(&image.omega, self.omega_min, self.omega_max)?;
        let cropped = image.crop(g, w)?;
        match self.bins {
            None => Ok(cropped),
            Some((ng, nw)) => {
                let span = |axis: &[f64], n: usize| -> Result<Vec<f64>> {
                    let (lo, hi) = (axis[0], axis[axis.len() - 1]);
                    match n {
                        0 => Err(Error::Config("ROI bin counts must be positive".into())),
                        1 => Ok(vec![lo]),
                        _ => Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()),
                    }
                };
                regrid(&cropped, &span(&cropped.gamma, ng)?, &span(&cropped.omega, nw)?)
            }
        }
    }
}
