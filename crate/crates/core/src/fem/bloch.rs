//! Bloch-Floquet reduction of the cell matrices.
//!
//! Right-edge DOFs are folded onto their left-edge partners with the phase
//! factor e^{iγa}; bottom-edge DOFs are removed (rigid foundation). The
//! reduced pencil is Tᴴ K T, Tᴴ M T with T the (complex) folding map.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::mesh::Mesh;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
enum Slot {
    Free(usize),
    Folded(usize),
    Fixed,
}

/// Mapping from full-mesh DOFs to Bloch-reduced DOFs for one cell mesh.
#[derive(Debug, Clone)]
pub struct BlochReduction {
    slots: Vec<Slot>,
    reduced: usize,
    cell_length: f64,
}

impl BlochReduction {
    pub fn new(mesh: &Mesh) -> Self {
        let n_nodes = mesh.node_count();
        let mut node_slot = vec![None; n_nodes];
        let mut is_bottom = vec![false; n_nodes];
        let mut right_partner = vec![None; n_nodes];
        for &b in &mesh.bottom {
            is_bottom[b] = true;
        }
        for (&l, &r) in mesh.left.iter().zip(&mesh.right) {
            if l != r {
                right_partner[r] = Some(l);
            }
        }
        let mut next = 0;
        for node in 0..n_nodes {
            if !is_bottom[node] && right_partner[node].is_none() {
                node_slot[node] = Some(next);
                next += 1;
            }
        }
        let mut slots = Vec::with_capacity(2 * n_nodes);
        for node in 0..n_nodes {
            let s = if is_bottom[node] {
                [Slot::Fixed, Slot::Fixed]
            } else if let Some(l) = right_partner[node] {
                let base = node_slot[l].expect("left partner is free");
                [Slot::Folded(2 * base), Slot::Folded(2 * base + 1)]
            } else {
                let base = node_slot[node].expect("free node numbered");
                [Slot::Free(2 * base), Slot::Free(2 * base + 1)]
            };
            slots.extend_from_slice(&s);
        }
        let cell_length = mesh.nodes[mesh.right[0]][0] - mesh.nodes[mesh.left[0]][0];
        BlochReduction {
            slots,
            reduced: 2 * next,
            cell_length,
        }
    }

    pub fn reduced_dim(&self) -> usize {
        self.reduced
    }

    pub fn cell_length(&self) -> f64 {
        self.cell_length
    }

    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.cell_length
    }

    pub fn check_wavenumber(&self, gamma: f64) -> Result<()> {
        let max = self.max_wavenumber();
        let tol = 1e-12 * max;
        if !gamma.is_finite() || gamma < -tol || gamma > max + tol {
            return Err(Error::WavenumberOutOfRange { gamma, max });
        }
        Ok(())
    }

    fn map(&self, dof: usize, phase: Complex64) -> Option<(usize, Complex64)> {
        match self.slots[dof] {
            Slot::Free(p) => Some((p, Complex64::new(1.0, 0.0))),
            Slot::Folded(p) => Some((p, phase)),
            Slot::Fixed => None,
        }
    }

    /// Visits every contribution (p, q, conj(c_i)·A_ij·c_j) of Tᴴ A T.
    pub fn for_each_reduced(
        &self,
        a: &CsrMatrix,
        gamma: f64,
        mut f: impl FnMut(usize, usize, Complex64),
    ) -> Result<()> {
        self.check_wavenumber(gamma)?;
        let phase = Complex64::from_polar(1.0, gamma * self.cell_length);
        for i in 0..a.dim() {
            let Some((p, ci)) = self.map(i, phase) else { continue };
            for (j, v) in a.row(i) {
                if let Some((q, cj)) = self.map(j, phase) {
                    f(p, q, ci.conj() * v * cj);
                }
            }
        }
        Ok(())
    }

    /// Tᴴ A T as a dense complex matrix.
    pub fn reduce(&self, a: &CsrMatrix, gamma: f64) -> Result<DMatrix<Complex64>> {
        let mut out = DMatrix::<Complex64>::zeros(self.reduced, self.reduced);
        self.for_each_reduced(a, gamma, |p, q, v| out[(p, q)] += v)?;
        Ok(out)
    }

    /// Real reduction with an explicit ±1 fold factor: the direct periodic
    /// (+1) or antiperiodic (−1) assembly.
    pub fn reduce_real(&self, a: &CsrMatrix, fold_sign: f64) -> DMatrix<f64> {
        let mut out = DMatrix::<f64>::zeros(self.reduced, self.reduced);
        let map = |dof: usize| match self.slots[dof] {
            Slot::Free(p) => Some((p, 1.0)),
            Slot::Folded(p) => Some((p, fold_sign)),
            Slot::Fixed => None,
        };
        for i in 0..a.dim() {
            let Some((p, ci)) = map(i) else { continue };
            for (j, v) in a.row(i) {
                if let Some((q, cj)) = map(j) {
                    out[(p, q)] += ci * v * cj;
                }
            }
        }
        out
    }

    /// Reduced DOF carrying full DOF `dof`, if it is not fixed.
    pub fn reduced_index(&self, dof: usize) -> Option<usize> {
        match self.slots[dof] {
            Slot::Free(p) | Slot::Folded(p) => Some(p),
            Slot::Fixed => None,
        }
    }
}

/// Hermitian Bloch pencil (K_γ, M_γ) at one wavenumber.
#[derive(Debug, Clone)]
pub struct BlochPencil {
    pub gamma: f64,
    pub stiffness: DMatrix<Complex64>,
    pub mass: DMatrix<Complex64>,
}

pub fn apply_bloch(k: &CsrMatrix, m: &CsrMatrix, mesh: &Mesh, gamma: f64) -> Result<BlochPencil> {
    let red = BlochReduction::new(mesh);
    apply_bloch_with(&red, k, m, gamma)
}

pub fn apply_bloch_with(red: &BlochReduction, k: &CsrMatrix, m: &CsrMatrix, gamma: f64) -> Result<BlochPencil> {
    Ok(BlochPencil {
        gamma,
        stiffness: red.reduce(k, gamma)?,
        mass: red.reduce(m, gamma)?,
    })
}

/// max |A − Aᴴ|
pub fn hermitian_residual(a: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}
