//! Smallest eigenvalues of the Hermitian pencil K u = λ M u.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::bloch::BlochPencil;
use crate::error::{Error, Result};

/// Relative floor below which small negative eigenvalues count as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;

/// Which algebraic route the dense solve takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenRoute {
    /// Native complex Hermitian reduction.
    #[default]
    Complex,
    /// Real symmetric 2n×2n embedding [[Re, −Im], [Im, Re]].
    RealEmbedding,
}

/// Converts ascending eigenvalues λ into angular frequencies √λ, clamping
/// round-off negatives.
pub(crate) fn to_frequencies(gamma: f64, lambdas: &[f64], count: usize) -> Result<Vec<f64>> {
    let scale = lambdas.iter().fold(0.0f64, |s, l| s.max(l.abs()));
    let floor = -NEGATIVE_CLAMP * scale;
    lambdas
        .iter()
        .take(count)
        .map(|&l| {
            if !l.is_finite() {
                Err(Error::Eigen {
                    gamma,
                    reason: format!("non-finite eigenvalue {l}"),
                })
            } else if l < floor {
                Err(Error::Eigen {
                    gamma,
                    reason: format!("eigenvalue {l} below clamp floor {floor}"),
                })
            } else {
                Ok(l.max(0.0).sqrt())
            }
        })
        .collect()
}

fn check_count(gamma: f64, count: usize, dim: usize) -> Result<()> {
    if count == 0 || count > dim {
        return Err(Error::Eigen {
            gamma,
            reason: format!("requested {count} branches from a pencil of dimension {dim}"),
        });
    }
    Ok(())
}

/// All eigenvalues of the pencil, ascending, through the complex route.
pub fn pencil_eigenvalues(pencil: &BlochPencil) -> Result<Vec<f64>> {
    let gamma = pencil.gamma;
    let chol = pencil.mass.clone().cholesky().ok_or_else(|| Error::Eigen {
        gamma,
        reason: "mass matrix is not positive definite".into(),
    })?;
    let l = chol.l();
    // C = L⁻¹ K L⁻ᴴ
    let x = l
        .solve_lower_triangular(&pencil.stiffness)
        .ok_or_else(|| Error::Eigen {
            gamma,
            reason: "singular Cholesky factor".into(),
        })?;
    let mut c = l.solve_lower_triangular(&x.adjoint()).ok_or_else(|| Error::Eigen {
        gamma,
        reason: "singular Cholesky factor".into(),
    })?;
    let ct = c.adjoint();
    c += ct;
    c *= Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(c, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| Error::Eigen {
        gamma,
        reason: "Hermitian eigen-iteration did not converge".into(),
    })?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn embed(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// All eigenvalues through the real 2n embedding (each appears twice there;
/// the duplicate is dropped).
pub fn pencil_eigenvalues_embedded(pencil: &BlochPencil) -> Result<Vec<f64>> {
    let gamma = pencil.gamma;
    let k = embed(&pencil.stiffness);
    let m = embed(&pencil.mass);
    let chol = m.cholesky().ok_or_else(|| Error::Eigen {
        gamma,
        reason: "embedded mass matrix is not positive definite".into(),
    })?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&k).ok_or_else(|| Error::Eigen {
        gamma,
        reason: "singular Cholesky factor".into(),
    })?;
    let mut c = l.solve_lower_triangular(&x.transpose()).ok_or_else(|| Error::Eigen {
        gamma,
        reason: "singular Cholesky factor".into(),
    })?;
    let ct = c.transpose();
    c = (c + ct) * 0.5;
    let eig = SymmetricEigen::try_new(c, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| Error::Eigen {
        gamma,
        reason: "symmetric eigen-iteration did not converge".into(),
    })?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values.into_iter().step_by(2).collect())
}

/// The `count` smallest angular frequencies ω = √λ, ascending.
pub fn solve_branches(pencil: &BlochPencil, count: usize) -> Result<Vec<f64>> {
    solve_branches_with(pencil, count, EigenRoute::Complex)
}

pub fn solve_branches_with(pencil: &BlochPencil, count: usize, route: EigenRoute) -> Result<Vec<f64>> {
    check_count(pencil.gamma, count, pencil.stiffness.nrows())?;
    let lambdas = match route {
        EigenRoute::Complex => pencil_eigenvalues(pencil)?,
        EigenRoute::RealEmbedding => pencil_eigenvalues_embedded(pencil)?,
    };
    to_frequencies(pencil.gamma, &lambdas, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::assemble;
    use crate::fem::bloch::{apply_bloch, BlochReduction};
    use crate::fem::mesh::build_mesh;
    use crate::material::{LayerGeometry, Material};

    fn pencil(gamma: f64, cell: f64) -> BlochPencil {
        let g = LayerGeometry::new(0.005, cell, 0.0005).unwrap();
        let mesh = build_mesh(&g).unwrap();
        let (k, m) = assemble(&mesh, &Material::soft_tissue(10e3).unwrap()).unwrap();
        apply_bloch(&k, &m, &mesh, gamma).unwrap()
    }

    #[test]
    fn routes_agree() {
        for gamma in [0.0, 310.0, 1900.0] {
            let p = pencil(gamma, 0.001);
            let a = solve_branches_with(&p, 12, EigenRoute::Complex).unwrap();
            let b = solve_branches_with(&p, 12, EigenRoute::RealEmbedding).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9 * y, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn ascending_and_nonnegative() {
        let p = pencil(700.0, 0.0015);
        let w = solve_branches(&p, 20).unwrap();
        assert_eq!(w.len(), 20);
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        assert!(w[0] > 0.0);
    }

    #[test]
    fn matches_direct_real_fold() {
        let g = LayerGeometry::new(0.005, 0.0015, 0.0005).unwrap();
        let mesh = build_mesh(&g).unwrap();
        let (k, m) = assemble(&mesh, &Material::soft_tissue(10e3).unwrap()).unwrap();
        let red = BlochReduction::new(&mesh);
        for (gamma, sign) in [(0.0, 1.0), (red.max_wavenumber(), -1.0)] {
            let complex = solve_branches(&apply_bloch(&k, &m, &mesh, gamma).unwrap(), 10).unwrap();
            let kr = red.reduce_real(&k, sign);
            let mr = red.reduce_real(&m, sign);
            let l = mr.cholesky().unwrap().l();
            let x = l.solve_lower_triangular(&kr).unwrap();
            let c = l.solve_lower_triangular(&x.transpose()).unwrap();
            let c = (&c + c.transpose()) * 0.5;
            let mut direct: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
            direct.sort_by(f64::total_cmp);
            for (w, l) in complex.iter().zip(&direct) {
                assert!((w - l.sqrt()).abs() <= 1e-10 * w);
            }
        }
    }

    #[test]
    fn too_many_branches() {
        let p = pencil(100.0, 0.0005);
        let n = p.stiffness.nrows();
        assert!(matches!(solve_branches(&p, n + 1), Err(Error::Eigen { .. })));
        assert!(solve_branches(&p, n).is_ok());
    }

    #[test]
    fn clamp_floor() {
        assert_eq!(to_frequencies(0.0, &[-1e-12, 4.0], 2).unwrap(), vec![0.0, 2.0]);
        assert!(to_frequencies(0.0, &[-1.0, 4.0], 2).is_err());
    }
}
