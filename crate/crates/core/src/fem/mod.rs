//! Bloch-Floquet FEM dispersion relations of a layer on a rigid foundation.

pub mod assembly;
pub mod bloch;
pub mod dispersion;
pub mod eigen;
pub mod lanczos;
pub mod mesh;
pub mod sparse;

pub use assembly::assemble;
pub use bloch::{apply_bloch, BlochPencil, BlochReduction};
pub use dispersion::{dispersion_curves, dispersion_curves_with, uniform_gamma_grid, DispersionCurves, SolverKind};
pub use eigen::{solve_branches, EigenRoute};
pub use mesh::{build_mesh, Mesh, NodeOrdering};
pub use sparse::CsrMatrix;
