//! Dimensionless groups governing observability and model accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents of (length, time) of a physical quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Dim(i32, i32);

impl std::ops::Mul for Dim {
    type Output = Dim;
    fn mul(self, o: Dim) -> Dim {
        Dim(self.0 + o.0, self.1 + o.1)
    }
}

impl std::ops::Div for Dim {
    type Output = Dim;
    fn div(self, o: Dim) -> Dim {
        Dim(self.0 - o.0, self.1 - o.1)
    }
}

const WAVENUMBER: Dim = Dim(-1, 0);
const ANGULAR_FREQ: Dim = Dim(0, -1);
const LENGTH: Dim = Dim(1, 0);
const TIME: Dim = Dim(0, 1);
/// Pixels are counts, so pixels per metre is an inverse length.
const PER_LENGTH: Dim = Dim(-1, 0);
const PER_TIME: Dim = Dim(0, -1);
const NONE: Dim = Dim(0, 0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharNumbers {
    /// Reference wavenumber, rad/m.
    pub gamma: f64,
    /// Reference angular frequency, rad/s.
    pub omega: f64,
    /// γL
    pub pi1: f64,
    /// PPM/γ
    pub pi2: f64,
    /// ωτ
    pub pi3: f64,
    /// FPS/ω
    pub pi4: f64,
    /// 1/(γe)
    pub pi5: f64,
    /// γT
    pub pi6: f64,
}

impl CharNumbers {
    pub fn values(&self) -> [(&'static str, f64); 6] {
        [
            ("pi1", self.pi1),
            ("pi2", self.pi2),
            ("pi3", self.pi3),
            ("pi4", self.pi4),
            ("pi5", self.pi5),
            ("pi6", self.pi6),
        ]
    }
}

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
) -> Result<CharNumbers> {
    let inputs = [
        ("gamma", gamma),
        ("omega", omega),
        ("window length", window_length),
        ("thickness", thickness),
        ("element size", element_size),
        ("ppm", ppm),
        ("fps", fps),
        ("duration", duration),
    ];
    for (name, v) in inputs {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let groups = [
        WAVENUMBER * LENGTH,
        PER_LENGTH / WAVENUMBER,
        ANGULAR_FREQ * TIME,
        PER_TIME / ANGULAR_FREQ,
        NONE / (WAVENUMBER * LENGTH),
        WAVENUMBER * LENGTH,
    ];
    assert!(
        groups.iter().all(|&d| d == NONE),
        "characteristic numbers must be dimensionless"
    );
    Ok(CharNumbers {
        gamma,
        omega,
        pi1: gamma * window_length,
        pi2: ppm / gamma,
        pi3: omega * duration,
        pi4: fps / omega,
        pi5: 1.0 / (gamma * element_size),
        pi6: gamma * thickness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilitudeEntry {
    pub name: String,
    pub a: f64,
    pub b: f64,
    /// |a − b| / max(|a|, |b|)
    pub relative_difference: f64,
    pub differs: bool,
}

/// Compares two parameter sets; entries differing by more than `tolerance`
/// (relative) are flagged.
pub fn similitude_report(a: &CharNumbers, b: &CharNumbers, tolerance: f64) -> Vec<SimilitudeEntry> {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&(name, x), (_, y))| {
            let rel = (x - y).abs() / x.abs().max(y.abs());
            SimilitudeEntry {
                name: name.to_string(),
                a: x,
                b: y,
                relative_difference: rel,
                differs: rel > tolerance,
            }
        })
        .collect()
}

/// Default similitude tolerance, relative.
pub const SIMILITUDE_TOLERANCE: f64 = 0.01;
