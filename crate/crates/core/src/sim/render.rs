//! Textured video of a known displacement field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::DisplacementField;
use crate::video::VideoClip;

/// Grayscale texture, row-major, intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable convolution with edge clamping.
pub(crate) fn blur(data: &[f64], rows: usize, cols: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let mut tmp = vec![0.0; data.len()];
    for y in 0..rows {
        for x in 0..cols {
            tmp[y * cols + x] = k
                .iter()
                .enumerate()
                .map(|(i, w)| w * data[y * cols + (x as isize + i as isize - r).clamp(0, cols as isize - 1) as usize])
                .sum();
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..rows {
        for x in 0..cols {
            out[y * cols + x] = k
                .iter()
                .enumerate()
                .map(|(i, w)| w * tmp[(y as isize + i as isize - r).clamp(0, rows as isize - 1) as usize * cols + x])
                .sum();
        }
    }
    out
}

impl Texture {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "texture of {} values for {rows}×{cols}",
                data.len()
            )));
        }
        Ok(Texture { rows, cols, data })
    }

    /// Seeded speckle: white noise blurred to a grain of `grain_px` pixels,
    /// stretched to [0.05, 0.95].
    pub fn random(rows: usize, cols: usize, grain_px: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
        let smooth = if grain_px > 0.0 {
            blur(&noise, rows, cols, grain_px)
        } else {
            noise
        };
        let (lo, hi) = smooth
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        Texture {
            rows,
            cols,
            data: smooth.iter().map(|v| 0.05 + 0.9 * (v - lo) / span).collect(),
        }
    }

    /// Bilinear sample at fractional (row, col), clamped to the edges.
    pub fn sample(&self, r: f64, c: f64) -> f64 {
        let r = r.clamp(0.0, (self.rows - 1) as f64);
        let c = c.clamp(0.0, (self.cols - 1) as f64);
        let r0 = (r.floor() as usize).min(self.rows.saturating_sub(2));
        let c0 = (c.floor() as usize).min(self.cols.saturating_sub(2));
        let (fr, fc) = (r - r0 as f64, c - c0 as f64);
        let r1 = (r0 + 1).min(self.rows - 1);
        let c1 = (c0 + 1).min(self.cols - 1);
        let at = |y: usize, x: usize| self.data[y * self.cols + x];
        (at(r0, c0) * (1.0 - fc) + at(r0, c1) * fc) * (1.0 - fr) + (at(r1, c0) * (1.0 - fc) + at(r1, c1) * fc) * fr
    }
}

/// Inverse-warps the texture by every frame's displacement. Horizontal
/// displacement moves content towards +column; positive (upward) vertical
/// displacement moves it towards −row.
pub fn render_video(field: &DisplacementField, texture: &Texture) -> Result<VideoClip> {
    field.validate()?;
    if texture.rows < field.rows || texture.cols < field.cols {
        return Err(Error::Size(format!(
            "texture {}×{} smaller than field {}×{}",
            texture.rows, texture.cols, field.rows, field.cols
        )));
    }
    let mut clip = VideoClip::zeros(field.rows, field.cols, field.frames, field.fps, field.ppm);
    for r in 0..field.rows {
        for c in 0..field.cols {
            let base = field.index(r, c, 0);
            for f in 0..field.frames {
                let dc = field.u[base + f] * field.ppm;
                let dr = -field.v[base + f] * field.ppm;
                clip.data[base + f] = texture.sample(r as f64 - dr, c as f64 - dc);
            }
        }
    }
    Ok(clip)
}
