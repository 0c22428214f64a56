//! Per-pixel displacement time series shared by the simulation, motion
//! extraction and spectral stages.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::container::{Container, ContainerHeader};

/// Horizontal (u) and vertical (v) displacement, metres, on an H×W pixel
/// grid over F frames. Storage is row-major over (H, W, F).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub rows: usize,
    pub cols: usize,
    pub frames: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Pixels per metre.
    pub ppm: f64,
    /// Frames per second.
    pub fps: f64,
}

impl DisplacementField {
    pub fn zeros(rows: usize, cols: usize, frames: usize, ppm: f64, fps: f64) -> Self {
        let n = rows * cols * frames;
        DisplacementField {
            rows,
            cols,
            frames,
            u: vec![0.0; n],
            v: vec![0.0; n],
            ppm,
            fps,
        }
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, frame: usize) -> usize {
        (row * self.cols + col) * self.frames + frame
    }

    /// Time series of one pixel.
    pub fn u_series(&self, row: usize, col: usize) -> &[f64] {
        let i = self.index(row, col, 0);
        &self.u[i..i + self.frames]
    }

    pub fn v_series(&self, row: usize, col: usize) -> &[f64] {
        let i = self.index(row, col, 0);
        &self.v[i..i + self.frames]
    }

    /// Observation window length W/ppm, m.
    pub fn window_length(&self) -> f64 {
        self.cols as f64 / self.ppm
    }

    /// Total observation time F/fps, s.
    pub fn duration(&self) -> f64 {
        self.frames as f64 / self.fps
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rows * self.cols * self.frames;
        if self.u.len() != n || self.v.len() != n {
            return Err(Error::Shape(format!(
                "field payloads ({}, {}) do not match shape {}×{}×{}",
                self.u.len(),
                self.v.len(),
                self.rows,
                self.cols,
                self.frames
            )));
        }
        if self.frames < 2 {
            return Err(Error::InsufficientSamples(format!(
                "displacement field needs at least 2 frames, got {}",
                self.frames
            )));
        }
        if !(self.ppm > 0.0 && self.ppm.is_finite() && self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Contract(format!(
                "sampling rates must be positive (ppm={}, fps={})",
                self.ppm, self.fps
            )));
        }
        if self.u.iter().chain(&self.v).any(|x| !x.is_finite()) {
            return Err(Error::Contract("displacements must be finite".into()));
        }
        Ok(())
    }

    /// Subtracts frame 0 from every frame so the field is relative to it.
    pub fn rebase_to_first_frame(&mut self) {
        let f = self.frames;
        for series in self.u.chunks_exact_mut(f).chain(self.v.chunks_exact_mut(f)) {
            let first = series[0];
            series.iter_mut().for_each(|x| *x -= first);
        }
    }

    /// Columns `start..start+len` of every row.
    pub fn crop_columns(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.cols {
            return Err(Error::Range(format!(
                "column crop {start}+{len} outside 0..{}",
                self.cols
            )));
        }
        let mut out = DisplacementField::zeros(self.rows, len, self.frames, self.ppm, self.fps);
        for r in 0..self.rows {
            for c in 0..len {
                let src = self.index(r, start + c, 0);
                let dst = out.index(r, c, 0);
                out.u[dst..dst + self.frames].copy_from_slice(&self.u[src..src + self.frames]);
                out.v[dst..dst + self.frames].copy_from_slice(&self.v[src..src + self.frames]);
            }
        }
        Ok(out)
    }

    pub fn rms(&self) -> f64 {
        let n = (self.u.len() + self.v.len()).max(1) as f64;
        (self.u.iter().chain(&self.v).map(|x| x * x).sum::<f64>() / n).sqrt()
    }

    pub fn to_container(&self) -> Container {
        let mut header = ContainerHeader::new(vec![self.rows, self.cols, self.frames], &["u", "v"]);
        header.ppm = Some(self.ppm);
        header.fps = Some(self.fps);
        header.units = BTreeMap::from([
            ("u".to_string(), "m".to_string()),
            ("v".to_string(), "m".to_string()),
            ("ppm".to_string(), "pixels/m".to_string()),
            ("fps".to_string(), "frames/s".to_string()),
        ]);
        Container {
            header,
            payloads: vec![self.u.clone(), self.v.clone()],
        }
    }

    pub fn from_container(c: Container, path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if c.header.shape.len() != 3 {
            return Err(bad("displacement field shape must be [H, W, F]"));
        }
        let (u, v) = match (c.field("u"), c.field("v")) {
            (Some(u), Some(v)) => (u.to_vec(), v.to_vec()),
            _ => return Err(bad("missing u or v field")),
        };
        let field = DisplacementField {
            rows: c.header.shape[0],
            cols: c.header.shape[1],
            frames: c.header.shape[2],
            u,
            v,
            ppm: c.header.ppm.ok_or_else(|| bad("missing ppm"))?,
            fps: c.header.fps.ok_or_else(|| bad("missing fps"))?,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_container(Container::read(path)?, path)
    }
}
