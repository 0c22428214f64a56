//! Layer thickness and stiffness from surface-wave motion.
//!
//! The pipeline runs motion fields through a row-wise f-k transform into an
//! observed dispersion image, then grid-searches thickness and stiffness for
//! the Bloch-Floquet FEM dispersion curves whose rasterized image best matches
//! it under SSIM.

pub mod error;
pub mod fem;
pub mod field;
pub mod inversion;
pub mod io;
pub mod material;
pub mod motion;
pub mod objectives;
pub mod sim;
pub mod spectral;
pub mod video;

pub use error::{Error, Result};
pub use material::{LayerGeometry, Material};
