//! Ramped linear chirp applied on the top surface.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Fraction of the chirp duration covered by each raised-cosine ramp.
pub const RAMP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcitationMode {
    /// Vertical displacement prescribed on the loaded nodes, m.
    #[default]
    Displacement,
    /// Vertical line load, N/m, distributed over the interval.
    Force,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    /// Sweep start frequency, Hz.
    pub f_start: f64,
    /// Sweep end frequency, Hz.
    pub f_end: f64,
    /// Sweep duration, s.
    pub duration: f64,
    pub amplitude: f64,
    pub mode: ExcitationMode,
    /// Loaded interval [x0, x1] on the top surface, m. A zero-width interval
    /// loads the nearest node.
    pub location: (f64, f64),
}

impl Default for Excitation {
    fn default() -> Self {
        Excitation {
            f_start: 40.0,
            f_end: 200.0,
            duration: 1.0,
            amplitude: 1e-5,
            mode: ExcitationMode::Displacement,
            location: (0.0, 0.002),
        }
    }
}

impl Excitation {
    pub fn validate(&self, strip_length: f64) -> Result<()> {
        if !(self.f_start > 0.0 && self.f_start < self.f_end && self.f_end.is_finite()) {
            return Err(Error::Config(format!(
                "chirp band must satisfy 0 < f_start < f_end, got {}..{}",
                self.f_start, self.f_end
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!(
                "chirp duration must be positive, got {}",
                self.duration
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Config("excitation amplitude must be finite".into()));
        }
        let (x0, x1) = self.location;
        if !(0.0 <= x0 && x0 <= x1 && x1 <= strip_length) {
            return Err(Error::Config(format!(
                "excitation interval [{x0}, {x1}] outside the strip [0, {strip_length}]"
            )));
        }
        Ok(())
    }

    /// Taper in [0, 1]: raised-cosine ramps over the first and last 5%.
    pub fn envelope(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        let ramp = RAMP_FRACTION * self.duration;
        let edge = t.min(self.duration - t);
        if edge >= ramp {
            1.0
        } else {
            0.5 * (1.0 - (PI * edge / ramp).cos())
        }
    }

    /// Instantaneous sweep frequency, Hz.
    pub fn frequency(&self, t: f64) -> f64 {
        self.f_start + (self.f_end - self.f_start) * t / self.duration
    }

    pub fn signal(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        let phase = 2.0 * PI * (self.f_start * t + 0.5 * (self.f_end - self.f_start) * t * t / self.duration);
        self.amplitude * self.envelope(t) * phase.sin()
    }
}
