//! Material and layer-geometry parameters of the soft layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic linear-elastic soft-layer material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Young's modulus, Pa.
    pub elastic_modulus: f64,
    pub poisson_ratio: f64,
    /// Mass density, kg/m³.
    pub density: f64,
}

impl Material {
    pub const DEFAULT_DENSITY: f64 = 1000.0;
    pub const DEFAULT_POISSON: f64 = 0.45;

    pub fn new(elastic_modulus: f64, poisson_ratio: f64, density: f64) -> Result<Self> {
        let m = Material {
            elastic_modulus,
            poisson_ratio,
            density,
        };
        m.validate()?;
        Ok(m)
    }

    /// Soft tissue defaults: ρ = 1000 kg/m³, ν = 0.45.
    pub fn soft_tissue(elastic_modulus: f64) -> Result<Self> {
        Self::new(elastic_modulus, Self::DEFAULT_POISSON, Self::DEFAULT_DENSITY)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.elastic_modulus.is_finite() && self.elastic_modulus > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "elastic modulus must be positive, got {}",
                self.elastic_modulus
            )));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        if !self.poisson_ratio.is_finite() || self.poisson_ratio <= 0.0 {
            return Err(Error::InvalidMaterial(format!(
                "poisson ratio must lie in (0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        if self.poisson_ratio >= 0.5 {
            return Err(Error::ConstitutiveSingularity { nu: self.poisson_ratio });
        }
        Ok(())
    }

    pub fn with_modulus(&self, elastic_modulus: f64) -> Result<Self> {
        Self::new(elastic_modulus, self.poisson_ratio, self.density)
    }

    pub fn shear_modulus(&self) -> f64 {
        self.elastic_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// P-wave modulus under plane strain, E(1−ν)/((1+ν)(1−2ν)).
    pub fn p_wave_modulus(&self) -> f64 {
        let nu = self.poisson_ratio;
        self.elastic_modulus * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu))
    }

    pub fn shear_speed(&self) -> f64 {
        (self.shear_modulus() / self.density).sqrt()
    }

    pub fn p_wave_speed(&self) -> f64 {
        (self.p_wave_modulus() / self.density).sqrt()
    }

    /// Viktorov's approximation of the Rayleigh wave speed.
    pub fn rayleigh_speed_estimate(&self) -> f64 {
        let nu = self.poisson_ratio;
        self.shear_speed() * (0.87 + 1.12 * nu) / (1.0 + nu)
    }
}

/// Soft-layer cross-section discretized for the Bloch cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerGeometry {
    /// Layer thickness T, m.
    pub thickness: f64,
    /// Bloch cell length a, m.
    pub cell_length: f64,
    /// Target FEM element size e, m.
    pub element_size: f64,
}

impl LayerGeometry {
    pub fn new(thickness: f64, cell_length: f64, element_size: f64) -> Result<Self> {
        let g = LayerGeometry {
            thickness,
            cell_length,
            element_size,
        };
        g.validate()?;
        Ok(g)
    }

    /// Geometry whose Bloch cell is a single element wide.
    pub fn single_column(thickness: f64, element_size: f64) -> Result<Self> {
        Self::new(thickness, element_size, element_size)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.thickness) || !pos(self.cell_length) || !pos(self.element_size) {
            return Err(Error::InvalidGeometry(format!(
                "thickness, cell length and element size must be positive (T={}, a={}, e={})",
                self.thickness, self.cell_length, self.element_size
            )));
        }
        let tol = 1e-9 * self.thickness.max(self.cell_length);
        if self.element_size > self.thickness.min(self.cell_length) + tol {
            return Err(Error::InvalidGeometry(format!(
                "element size {} exceeds min(T, a) = {}",
                self.element_size,
                self.thickness.min(self.cell_length)
            )));
        }
        if self.rows() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "thickness {} with element size {} gives fewer than 2 element rows",
                self.thickness, self.element_size
            )));
        }
        Ok(())
    }

    /// Element columns across the cell, round(a/e) ≥ 1.
    pub fn columns(&self) -> usize {
        ((self.cell_length / self.element_size).round() as usize).max(1)
    }

    /// Element rows through the thickness, round(T/e).
    pub fn rows(&self) -> usize {
        (self.thickness / self.element_size).round() as usize
    }

    /// Upper end of the irreducible wavenumber interval, π/a.
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.cell_length
    }

    pub fn element_count(&self) -> usize {
        self.rows() * self.columns()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_speeds() {
        let m = Material::soft_tissue(10e3).unwrap();
        assert!((m.shear_speed() - 1.857).abs() < 1e-3);
        assert!((m.p_wave_speed() - 6.16).abs() < 1e-2);
        assert!((m.rayleigh_speed_estimate() / m.shear_speed() - 0.9476).abs() < 1e-3);
    }

    #[test]
    fn material_errors() {
        assert!(matches!(
            Material::new(1e4, 0.5, 1000.0),
            Err(Error::ConstitutiveSingularity { .. })
        ));
        assert!(matches!(
            Material::new(-1.0, 0.3, 1000.0),
            Err(Error::InvalidMaterial(_))
        ));
        assert!(Material::new(1e4, 0.0, 1000.0).is_err());
        assert!(Material::new(1e4, 0.3, 0.0).is_err());
    }

    #[test]
    fn geometry_counts() {
        let g = LayerGeometry::new(0.010, 0.010, 0.0005).unwrap();
        assert_eq!((g.columns(), g.rows()), (20, 20));
        let g = LayerGeometry::new(0.010, 0.001, 0.0005).unwrap();
        assert_eq!((g.columns(), g.rows()), (2, 20));
        let g = LayerGeometry::new(0.010, 0.006, 0.0005).unwrap();
        assert_eq!(g.element_count(), 240);
    }

    #[test]
    fn geometry_errors() {
        assert!(matches!(
            LayerGeometry::new(0.010, 0.001, 0.002),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(LayerGeometry::new(0.001, 0.001, 0.001).is_err());
        assert!(LayerGeometry::new(0.0, 0.001, 0.001).is_err());
    }
}
