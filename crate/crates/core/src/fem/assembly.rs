//! Plane-strain stiffness and consistent mass assembly for bilinear quads.

use nalgebra::{Matrix3, SMatrix};

use super::mesh::Mesh;
use super::sparse::CsrMatrix;
use crate::error::Result;
use crate::material::Material;

pub type ElementMatrix = SMatrix<f64, 8, 8>;

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Plane-strain isotropic constitutive matrix in Voigt order (xx, yy, xy).
pub fn constitutive(material: &Material) -> Result<Matrix3<f64>> {
    material.validate()?;
    let nu = material.poisson_ratio;
    let c = material.elastic_modulus / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Ok(Matrix3::new(
        c * (1.0 - nu),
        c * nu,
        0.0,
        c * nu,
        c * (1.0 - nu),
        0.0,
        0.0,
        0.0,
        c * (1.0 - 2.0 * nu) / 2.0,
    ))
}

fn shape(xi: f64, eta: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let n = [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ];
    let dxi = [
        -0.25 * (1.0 - eta),
        0.25 * (1.0 - eta),
        0.25 * (1.0 + eta),
        -0.25 * (1.0 + eta),
    ];
    let deta = [
        -0.25 * (1.0 - xi),
        -0.25 * (1.0 + xi),
        0.25 * (1.0 + xi),
        0.25 * (1.0 - xi),
    ];
    (n, dxi, deta)
}

/// Element stiffness and consistent mass (unit depth), 2×2 Gauss quadrature.
/// DOF order is (u₀, v₀, u₁, v₁, …).
pub fn element_matrices(coords: &[[f64; 2]; 4], d: &Matrix3<f64>, density: f64) -> (ElementMatrix, ElementMatrix) {
    let mut ke = ElementMatrix::zeros();
    let mut me = ElementMatrix::zeros();
    for &xi in &GAUSS {
        for &eta in &GAUSS {
            let (n, dxi, deta) = shape(xi, eta);
            let (mut j11, mut j12, mut j21, mut j22) = (0.0, 0.0, 0.0, 0.0);
            for a in 0..4 {
                j11 += dxi[a] * coords[a][0];
                j12 += dxi[a] * coords[a][1];
                j21 += deta[a] * coords[a][0];
                j22 += deta[a] * coords[a][1];
            }
            let det = j11 * j22 - j12 * j21;
            assert!(det > 0.0, "element with non-positive Jacobian");
            let mut b = SMatrix::<f64, 3, 8>::zeros();
            for a in 0..4 {
                let dx = (j22 * dxi[a] - j12 * deta[a]) / det;
                let dy = (-j21 * dxi[a] + j11 * deta[a]) / det;
                b[(0, 2 * a)] = dx;
                b[(1, 2 * a + 1)] = dy;
                b[(2, 2 * a)] = dy;
                b[(2, 2 * a + 1)] = dx;
            }
            ke += b.transpose() * d * b * det;
            for a in 0..4 {
                for c in 0..4 {
                    let m = density * n[a] * n[c] * det;
                    me[(2 * a, 2 * c)] += m;
                    me[(2 * a + 1, 2 * c + 1)] += m;
                }
            }
        }
    }
    // exact symmetry keeps the Bloch pencil Hermitian to rounding
    ke = (ke + ke.transpose()) * 0.5;
    (ke, me)
}

/// Global DOF indices of an element, (u, v) interleaved per node.
pub fn element_dofs(conn: &[usize; 4]) -> [usize; 8] {
    let mut dofs = [0; 8];
    for (a, &node) in conn.iter().enumerate() {
        dofs[2 * a] = 2 * node;
        dofs[2 * a + 1] = 2 * node + 1;
    }
    dofs
}

/// Sparsity pattern shared by every matrix assembled on `mesh`.
pub fn pattern(mesh: &Mesh) -> CsrMatrix {
    let mut rows = vec![Vec::new(); mesh.dof_count()];
    for conn in &mesh.elements {
        let dofs = element_dofs(conn);
        for &i in &dofs {
            rows[i].extend_from_slice(&dofs);
        }
    }
    CsrMatrix::from_pattern(rows)
}

/// Global stiffness K and consistent mass M on `mesh`.
pub fn assemble(mesh: &Mesh, material: &Material) -> Result<(CsrMatrix, CsrMatrix)> {
    let d = constitutive(material)?;
    let mut k = pattern(mesh);
    let mut m = k.clone();
    for conn in &mesh.elements {
        let coords = conn.map(|n| mesh.nodes[n]);
        let (ke, me) = element_matrices(&coords, &d, material.density);
        let dofs = element_dofs(conn);
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                k.add(i, j, ke[(a, b)]);
                m.add(i, j, me[(a, b)]);
            }
        }
    }
    Ok((k, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{build_mesh, NodeOrdering};
    use crate::material::LayerGeometry;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn square() -> [[f64; 2]; 4] {
        [[0.0, 0.0], [1e-3, 0.0], [1e-3, 1e-3], [0.0, 1e-3]]
    }

    #[test]
    fn single_element_has_three_rigid_modes() {
        let mat = Material::soft_tissue(10e3).unwrap();
        let (ke, me) = element_matrices(&square(), &constitutive(&mat).unwrap(), mat.density);
        let k = DMatrix::from_iterator(8, 8, ke.iter().copied());
        let eig = SymmetricEigen::new(k).eigenvalues;
        let scale = eig.amax();
        let zeros = eig.iter().filter(|&&l| l.abs() < 1e-10 * scale).count();
        assert_eq!(zeros, 3);
        assert!(eig.iter().all(|&l| l > -1e-10 * scale));
        let m = DMatrix::from_iterator(8, 8, me.iter().copied());
        assert!(m.cholesky().is_some());
    }

    #[test]
    fn stiffness_linear_in_modulus() {
        let g = LayerGeometry::new(0.004, 0.002, 0.001).unwrap();
        let mesh = build_mesh(&g).unwrap();
        let m1 = Material::soft_tissue(10e3).unwrap();
        let m2 = Material::soft_tissue(20e3).unwrap();
        let (k1, mass1) = assemble(&mesh, &m1).unwrap();
        let (k2, mass2) = assemble(&mesh, &m2).unwrap();
        for (a, b) in k1.values().iter().zip(k2.values()) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-30));
        }
        assert_eq!(mass1, mass2);
    }

    #[test]
    fn total_mass_matches_rho_a_t() {
        // 1ᵀ M 1 over one displacement direction equals ρ a T per unit depth
        let (a, t) = (0.006, 0.010);
        let mesh = Mesh::structured(a, t, 12, 20, NodeOrdering::ColumnMajor).unwrap();
        let mat = Material::new(10e3, 0.45, 1000.0).unwrap();
        let (_, m) = assemble(&mesh, &mat).unwrap();
        let n = m.dim();
        let ex: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let ey: Vec<f64> = (0..n).map(|i| if i % 2 == 1 { 1.0 } else { 0.0 }).collect();
        let exact = 1000.0 * a * t;
        assert!((m.bilinear(&ex, &ex) - exact).abs() < 1e-12 * exact);
        assert!((m.bilinear(&ey, &ey) - exact).abs() < 1e-12 * exact);
        assert!(m.bilinear(&ex, &ey).abs() < 1e-15);
    }

    #[test]
    fn global_matrices_symmetric() {
        let g = LayerGeometry::new(0.003, 0.002, 0.0005).unwrap();
        let mesh = build_mesh(&g).unwrap();
        let (k, m) = assemble(&mesh, &Material::soft_tissue(5e3).unwrap()).unwrap();
        assert!(k.asymmetry() < 1e-12 * k.values().iter().fold(0.0f64, |s, v| s.max(v.abs())));
        assert!(m.asymmetry() < 1e-18);
    }

    #[test]
    fn rejects_incompressible() {
        let mat = Material {
            elastic_modulus: 1e4,
            poisson_ratio: 0.5,
            density: 1000.0,
        };
        assert!(matches!(
            constitutive(&mat),
            Err(crate::error::Error::ConstitutiveSingularity { .. })
        ));
    }
}
