//! Pick-off of recorded strip histories onto a camera pixel grid.

use serde::{Deserialize, Serialize};

use super::newmark::SimHistory;
use crate::error::{Error, Result};
use crate::field::DisplacementField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSampling {
    /// Pixels per metre.
    pub ppm: f64,
    /// Frames per second.
    pub fps: f64,
    /// Observed interval [x0, x1] of the strip surface, m.
    pub window: (f64, f64),
    /// Image rows that replicate the surface line.
    #[serde(default = "one")]
    pub rows: usize,
    /// Append the recorded sub-surface rows below the replicated ones.
    #[serde(default)]
    pub subsurface: bool,
}

fn one() -> usize {
    1
}

impl SurfaceSampling {
    pub fn new(ppm: f64, fps: f64, window: (f64, f64)) -> Self {
        SurfaceSampling {
            ppm,
            fps,
            window,
            rows: 1,
            subsurface: false,
        }
    }

    pub fn window_length(&self) -> f64 {
        self.window.1 - self.window.0
    }

    pub fn columns(&self) -> usize {
        (self.window_length() * self.ppm).round().max(0.0) as usize
    }
}

/// Single-row pick-off of the surface line.
pub fn sample_surface(history: &SimHistory, ppm: f64, fps: f64, window: (f64, f64)) -> Result<DisplacementField> {
    sample_surface_with(history, &SurfaceSampling::new(ppm, fps, window))
}

fn interp(series: &[f64], n_nodes: usize, h: f64, x: f64, s: f64) -> f64 {
    // bilinear in (node, sample)
    let xi = (x / h).clamp(0.0, (n_nodes - 1) as f64);
    let i0 = (xi.floor() as usize).min(n_nodes.saturating_sub(2));
    let fx = xi - i0 as f64;
    let samples = series.len() / n_nodes;
    let s0 = (s.floor() as usize).min(samples.saturating_sub(2));
    let fs = s - s0 as f64;
    let at = |si: usize, ni: usize| series[si * n_nodes + ni];
    let a = at(s0, i0) * (1.0 - fx) + at(s0, i0 + 1) * fx;
    let b = at(s0 + 1, i0) * (1.0 - fx) + at(s0 + 1, i0 + 1) * fx;
    a * (1.0 - fs) + b * fs
}

pub fn sample_surface_with(history: &SimHistory, sampling: &SurfaceSampling) -> Result<DisplacementField> {
    let (x0, x1) = sampling.window;
    let pos = |v: f64| v.is_finite() && v > 0.0;
    if !(pos(sampling.ppm) && pos(sampling.fps)) {
        return Err(Error::Resampling(format!(
            "ppm and fps must be positive (ppm={}, fps={})",
            sampling.ppm, sampling.fps
        )));
    }
    let w = sampling.columns();
    if !(x1 > x0) || w == 0 || sampling.rows == 0 {
        return Err(Error::Resampling(format!("empty observation window [{x0}, {x1}]")));
    }
    if x0 < 0.0 || x0 + (w - 1) as f64 / sampling.ppm > history.strip_length * (1.0 + 1e-12) {
        return Err(Error::Resampling(format!(
            "window [{x0}, {x1}] outside the strip [0, {}]",
            history.strip_length
        )));
    }
    if history.strip_length < 4.0 * sampling.window_length() * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "strip length {} m is shorter than 4× the window length {} m",
            history.strip_length,
            sampling.window_length()
        )));
    }
    if sampling.fps * history.dt > 1.0 + 1e-9 {
        return Err(Error::Resampling(format!(
            "frame rate {} exceeds the simulation rate {}",
            sampling.fps,
            1.0 / history.dt
        )));
    }
    let frames = (history.total_time() * sampling.fps + 1e-9).floor() as usize;
    if frames < 2 {
        return Err(Error::Resampling(format!(
            "only {frames} frame(s) fit in the simulated time"
        )));
    }
    let extra = if sampling.subsurface {
        history.depths.len() - 1
    } else {
        0
    };
    let h_rows = sampling.rows + extra;
    let mut field = DisplacementField::zeros(h_rows, w, frames, sampling.ppm, sampling.fps);
    let n_nodes = history.x.len();
    let h = history.strip_length / (n_nodes - 1) as f64;
    let source_row = |r: usize| if r < sampling.rows { 0 } else { r - sampling.rows + 1 };
    for r in 0..h_rows {
        let src = source_row(r);
        for c in 0..w {
            let x = x0 + c as f64 / sampling.ppm;
            let base = field.index(r, c, 0);
            for f in 0..frames {
                let s = f as f64 / (sampling.fps * history.dt);
                field.u[base + f] = interp(&history.u[src], n_nodes, h, x, s);
                field.v[base + f] = interp(&history.v[src], n_nodes, h, x, s);
            }
        }
    }
    field.rebase_to_first_frame();
    Ok(field)
}
