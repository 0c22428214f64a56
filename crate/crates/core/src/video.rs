//! Grayscale video clips: in-memory layout, raw container and PNG frames.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::container::{Container, ContainerHeader};

/// Intensities in [0, 1] on an H×W grid over F frames, stored row-major
/// over (H, W, F) like [`DisplacementField`](crate::field::DisplacementField).
#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    pub rows: usize,
    pub cols: usize,
    pub frames: usize,
    pub data: Vec<f64>,
    pub fps: f64,
    pub ppm: f64,
}

impl VideoClip {
    pub fn zeros(rows: usize, cols: usize, frames: usize, fps: f64, ppm: f64) -> Self {
        VideoClip {
            rows,
            cols,
            frames,
            data: vec![0.0; rows * cols * frames],
            fps,
            ppm,
        }
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, frame: usize) -> usize {
        (row * self.cols + col) * self.frames + frame
    }

    /// Frame `f` as a row-major H×W image.
    pub fn frame(&self, f: usize) -> Vec<f64> {
        (0..self.rows * self.cols)
            .map(|p| self.data[p * self.frames + f])
            .collect()
    }

    pub fn set_frame(&mut self, f: usize, image: &[f64]) {
        for (p, &v) in image.iter().enumerate() {
            self.data[p * self.frames + f] = v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.rows * self.cols * self.frames {
            return Err(Error::Shape("video payload does not match its shape".into()));
        }
        if self.frames < 2 {
            return Err(Error::InsufficientSamples(format!(
                "video needs at least 2 frames, got {}",
                self.frames
            )));
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("video intensities must be finite".into()));
        }
        if !(self.fps > 0.0 && self.ppm > 0.0) {
            return Err(Error::Contract("video fps and ppm must be positive".into()));
        }
        Ok(())
    }

    pub fn to_container(&self) -> Container {
        let mut header = ContainerHeader::new(vec![self.rows, self.cols, self.frames], &["intensity"]);
        header.ppm = Some(self.ppm);
        header.fps = Some(self.fps);
        header.units = BTreeMap::from([("intensity".to_string(), "1".to_string())]);
        Container {
            header,
            payloads: vec![self.data.clone()],
        }
    }

    pub fn from_container(c: Container, path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if c.header.shape.len() != 3 {
            return Err(bad("video shape must be [H, W, F]"));
        }
        let data = c
            .field("intensity")
            .ok_or_else(|| bad("missing intensity field"))?
            .to_vec();
        let clip = VideoClip {
            rows: c.header.shape[0],
            cols: c.header.shape[1],
            frames: c.header.shape[2],
            data,
            fps: c.header.fps.ok_or_else(|| bad("missing fps"))?,
            ppm: c.header.ppm.ok_or_else(|| bad("missing ppm"))?,
        };
        clip.validate()?;
        Ok(clip)
    }

    /// Writes `frame_00000.png`, ... as 16-bit grayscale.
    pub fn write_png_frames(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for f in 0..self.frames {
            let px: Vec<u16> = self
                .frame(f)
                .iter()
                .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
                .collect();
            let img =
                image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(self.cols as u32, self.rows as u32, px)
                    .expect("buffer matches dimensions");
            let path = dir.join(format!("frame_{f:05}.png"));
            img.save(&path)
                .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    /// Reads every `*.png` in `dir`, in file-name order, as one clip.
    pub fn read_png_frames(dir: &Path, fps: f64, ppm: f64) -> Result<Self> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::InsufficientSamples(format!(
                "no PNG frames in {}",
                dir.display()
            )));
        }
        let mut clip: Option<VideoClip> = None;
        for (f, p) in paths.iter().enumerate() {
            let img = image::open(p)
                .map_err(|e| Error::Image(format!("{}: {e}", p.display())))?
                .to_luma16();
            let (w, h) = (img.width() as usize, img.height() as usize);
            let c = clip.get_or_insert_with(|| VideoClip::zeros(h, w, paths.len(), fps, ppm));
            if (h, w) != (c.rows, c.cols) {
                return Err(Error::Shape(format!(
                    "{} is {w}×{h}, expected {}×{}",
                    p.display(),
                    c.cols,
                    c.rows
                )));
            }
            let frame: Vec<f64> = img.as_raw().iter().map(|&v| v as f64 / 65535.0).collect();
            c.set_frame(f, &frame);
        }
        let clip = clip.expect("at least one frame");
        clip.validate()?;
        Ok(clip)
    }

    /// Directory of PNG frames, or a raw container file.
    pub fn read(path: &Path, fps: f64, ppm: f64) -> Result<Self> {
        if path.is_dir() {
            Self::read_png_frames(path, fps, ppm)
        } else {
            Self::from_container(Container::read(path)?, path)
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }
}
