//! Python bindings. Configurations cross the boundary as JSON strings in the
//! same shape the CLI accepts; arrays come back as flat lists with a shape.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;
use wave_elastix::fem::dispersion_curves_with;
use wave_elastix::field::DisplacementField;
use wave_elastix::inversion::{self, FemConfig, SearchGrid, SearchOptions};
use wave_elastix::motion::{phase_displacements, FilterParams};
use wave_elastix::objectives::ObjectiveKind;
use wave_elastix::spectral::{self, DispersionImage, Roi};
use wave_elastix::video::VideoClip;
use wave_elastix::Error;

fn to_py(e: Error) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    match e {
        Error::Io { .. } | Error::Format { .. } | Error::Image(_) => PyIOError::new_err(msg),
        Error::Eigen { .. } | Error::Instability { .. } => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

/// Deserializes `json` over the defaults of `T`; `None` keeps the defaults.
fn from_json<T: serde::Serialize + serde::de::DeserializeOwned + Default>(json: Option<&str>) -> PyResult<T> {
    let Some(text) = json else { return Ok(T::default()) };
    let mut doc = serde_json::to_value(T::default()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let overlay: Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    merge(&mut doc, overlay)?;
    serde_json::from_value(doc).map_err(|e| PyValueError::new_err(format!("invalid configuration: {e}")))
}

fn merge(base: &mut Value, overlay: Value) -> PyResult<()> {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let slot = b
                    .get_mut(&k)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown configuration key {k:?}")))?;
                merge(slot, v)?;
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

fn objective(name: &str) -> PyResult<ObjectiveKind> {
    serde_json::from_value(Value::String(name.into())).map_err(|_| {
        PyValueError::new_err(format!(
            "unknown objective {name:?}; expected ssim, mse-neg, psnr or curve"
        ))
    })
}

/// Surface displacement field, metres, indexed (row, column, frame).
#[pyclass(name = "DisplacementField", module = "wave_elastix_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyField {
    pub inner: DisplacementField,
}

#[pymethods]
impl PyField {
    #[staticmethod]
    pub fn read(path: PathBuf) -> PyResult<Self> {
        Ok(PyField {
            inner: DisplacementField::read(&path).map_err(to_py)?,
        })
    }

    pub fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(&path).map_err(to_py)
    }

    /// (rows, cols, frames)
    #[getter]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.inner.rows, self.inner.cols, self.inner.frames)
    }

    #[getter]
    pub fn ppm(&self) -> f64 {
        self.inner.ppm
    }

    #[getter]
    pub fn fps(&self) -> f64 {
        self.inner.fps
    }

    /// Horizontal displacement, flat row-major over `shape`.
    #[getter]
    pub fn u(&self) -> Vec<f64> {
        self.inner.u.clone()
    }

    /// Vertical displacement, flat row-major over `shape`.
    #[getter]
    pub fn v(&self) -> Vec<f64> {
        self.inner.v.clone()
    }

    pub fn rms(&self) -> f64 {
        self.inner.rms()
    }

    /// Adds seeded white noise at `fraction` of the field RMS, in place.
    pub fn add_noise(&mut self, fraction: f64, seed: u64) -> PyResult<()> {
        inversion::add_noise(&mut self.inner, fraction, seed).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let (h, w, f) = self.shape();
        format!(
            "DisplacementField(shape=({h}, {w}, {f}), ppm={}, fps={})",
            self.inner.ppm, self.inner.fps
        )
    }
}

/// Observed or prepared dispersion image over (γ rad/m, ω rad/s).
#[pyclass(name = "DispersionImage", module = "wave_elastix_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyImage {
    pub inner: DispersionImage,
}

#[pymethods]
impl PyImage {
    #[staticmethod]
    pub fn read(path: PathBuf) -> PyResult<Self> {
        Ok(PyImage {
            inner: DispersionImage::read(&path).map_err(to_py)?,
        })
    }

    pub fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(&path).map_err(to_py)
    }

    /// (γ bins, ω bins)
    #[getter]
    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    #[getter]
    pub fn gamma(&self) -> Vec<f64> {
        self.inner.gamma.clone()
    }

    #[getter]
    pub fn omega(&self) -> Vec<f64> {
        self.inner.omega.clone()
    }

    /// Flat, γ-major.
    #[getter]
    pub fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    pub fn argmax(&self) -> (usize, usize) {
        self.inner.argmax()
    }

    /// Crop, regrid and normalize for fitting. `roi` is a JSON object over
    /// the default fit region.
    #[pyo3(signature = (roi=None))]
    pub fn prepare(&self, roi: Option<&str>) -> PyResult<Self> {
        let roi: Roi = from_json(roi)?;
        Ok(PyImage {
            inner: inversion::prepare(&self.inner, &roi).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        let (g, w) = self.shape();
        format!(
            "DispersionImage(shape=({g}, {w}), normalization={:?})",
            self.inner.normalization
        )
    }
}

/// Grid-search outcome with its full score landscape.
#[pyclass(name = "Estimate", module = "wave_elastix_py")]
pub struct PyEstimate {
    pub inner: inversion::EstimationResult,
}

#[pymethods]
impl PyEstimate {
    #[getter]
    pub fn t_star(&self) -> f64 {
        self.inner.t_star
    }

    #[getter]
    pub fn e_star(&self) -> f64 {
        self.inner.e_star
    }

    /// Grid indices (thickness, stiffness) of the estimate.
    #[getter]
    pub fn cell(&self) -> (usize, usize) {
        self.inner.cell()
    }

    #[getter]
    pub fn thickness_grid(&self) -> Vec<f64> {
        self.inner.grid.thickness.clone()
    }

    #[getter]
    pub fn stiffness_grid(&self) -> Vec<f64> {
        self.inner.grid.stiffness.clone()
    }

    /// Scores, flat thickness-major.
    #[getter]
    pub fn scores(&self) -> Vec<f64> {
        self.inner.landscape().scores.clone()
    }

    #[getter]
    pub fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    pub fn sharpness(&self) -> f64 {
        self.inner.landscape().sharpness()
    }

    pub fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Estimate(t_star={}, e_star={}, cell={:?})",
            self.inner.t_star,
            self.inner.e_star,
            self.cell()
        )
    }
}

/// Synthetic experiment; `config` is a JSON object over the defaults.
#[pyclass(name = "Scenario", module = "wave_elastix_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyScenario {
    pub inner: inversion::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (config=None))]
    pub fn new(config: Option<&str>) -> PyResult<Self> {
        Ok(PyScenario {
            inner: from_json(config)?,
        })
    }

    #[getter]
    pub fn thickness(&self) -> f64 {
        self.inner.thickness
    }

    #[getter]
    pub fn elastic_modulus(&self) -> f64 {
        self.inner.material.elastic_modulus
    }

    pub fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Sampled surface field, with noise and video round trip if configured.
    pub fn field(&self) -> PyResult<PyField> {
        Ok(PyField {
            inner: self.inner.field().map_err(to_py)?,
        })
    }

    /// Raw observed dispersion image.
    pub fn observe(&self) -> PyResult<PyImage> {
        Ok(PyImage {
            inner: self.inner.observe().map_err(to_py)?,
        })
    }
}

/// Raw observed dispersion image of a displacement field.
#[pyfunction]
pub fn observed_dispersion(field: &PyField) -> PyResult<PyImage> {
    Ok(PyImage {
        inner: spectral::observed_dispersion(&field.inner).map_err(to_py)?,
    })
}

/// FEM dispersion branches ω_i(γ) in rad/s, one list per branch.
#[pyfunction]
#[pyo3(signature = (thickness, elastic_modulus, gamma, branches=12, fem=None))]
pub fn dispersion_curves(
    thickness: f64,
    elastic_modulus: f64,
    gamma: Vec<f64>,
    branches: usize,
    fem: Option<&str>,
) -> PyResult<Vec<Vec<f64>>> {
    let fem: FemConfig = from_json(fem)?;
    let geom = fem.geometry(thickness).map_err(to_py)?;
    let mat = fem.material(elastic_modulus).map_err(to_py)?;
    Ok(dispersion_curves_with(&geom, &mat, &gamma, branches, fem.solver)
        .map_err(to_py)?
        .branches)
}

/// Motion field from a PNG frame directory or video container.
#[pyfunction]
#[pyo3(signature = (video, fps, ppm, filter=None))]
pub fn extract_motion(video: PathBuf, fps: f64, ppm: f64, filter: Option<&str>) -> PyResult<PyField> {
    let params: FilterParams = from_json(filter)?;
    let clip = VideoClip::read(&video, fps, ppm).map_err(to_py)?;
    Ok(PyField {
        inner: phase_displacements(&clip, &params).map_err(to_py)?,
    })
}

/// Grid search over thickness `t` and stiffness `e`, each (min, max, count).
/// Raw images are prepared with the default fit region first.
#[pyfunction]
#[pyo3(signature = (image, t, e, objective="ssim", options=None))]
pub fn grid_search(
    image: &PyImage,
    t: (f64, f64, usize),
    e: (f64, f64, usize),
    objective: &str,
    options: Option<&str>,
) -> PyResult<PyEstimate> {
    let mut opts: SearchOptions = from_json(options)?;
    opts.objective = self::objective(objective)?;
    let grid = SearchGrid::uniform(t, e).map_err(to_py)?;
    let observed = match image.inner.normalization {
        spectral::Normalization::Raw => inversion::prepare(&image.inner, &Roi::default()).map_err(to_py)?,
        spectral::Normalization::Percentile => image.inner.clone(),
    };
    Ok(PyEstimate {
        inner: inversion::grid_search(&observed, &grid, &opts).map_err(to_py)?,
    })
}

/// π₁..π₆ of an observation setup, as a dict.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
pub fn characteristic_numbers(
    gamma: f64,
    omega: f64,
    window_length: f64,
    thickness: f64,
    element_size: f64,
    ppm: f64,
    fps: f64,
    duration: f64,
) -> PyResult<BTreeMap<String, f64>> {
    let c = inversion::characteristic_numbers(gamma, omega, window_length, thickness, element_size, ppm, fps, duration)
        .map_err(to_py)?;
    Ok(c.values().iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

#[pymodule]
fn wave_elastix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyImage>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(observed_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion_curves, m)?)?;
    m.add_function(wrap_pyfunction!(extract_motion, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic_numbers, m)?)?;
    Ok(())
}
