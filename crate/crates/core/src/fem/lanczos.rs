//! Iterative smallest-eigenvalue path for large Bloch pencils.
//!
//! Block Krylov iteration on the shift-invert operator K⁻¹M (self-adjoint in
//! the M inner product) with full reorthogonalization and explicit
//! Rayleigh-Ritz. K_γ is factored once per wavenumber as a banded LLᴴ.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bloch::BlochReduction;
use super::eigen::to_frequencies;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub block_size: usize,
    /// Relative M-norm residual accepted for a Ritz pair.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            block_size: 4,
            tolerance: 1e-10,
            seed: 0x5eed,
        }
    }
}

/// Hermitian matrix stored as its lower band.
#[derive(Debug, Clone)]
pub struct BandedHermitian {
    n: usize,
    bw: usize,
    // row i holds columns i-bw ..= i at offsets 0 ..= bw
    band: Vec<Complex64>,
}

impl BandedHermitian {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedHermitian {
            n,
            bw,
            band: vec![Complex64::new(0.0, 0.0); n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds to (i, j); only the lower triangle is kept, so upper entries are
    /// ignored (their conjugates arrive through (j, i)).
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        if j <= i {
            let k = self.idx(i, j);
            self.band[k] += v;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j <= i {
            if i - j > self.bw {
                Complex64::new(0.0, 0.0)
            } else {
                self.band[self.idx(i, j)]
            }
        } else {
            self.get(j, i).conj()
        }
    }

    pub fn mul_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.band[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            let off = self.bw - (i - lo);
            let mut acc = row[self.bw] * x[i];
            for (k, j) in (lo..i).enumerate() {
                let a = row[off + k];
                acc += a * x[j];
                y[j] += a.conj() * x[i];
            }
            y[i] += acc;
        }
    }

    /// In-place banded Cholesky A = L Lᴴ.
    pub fn cholesky(mut self) -> Option<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut d = self.band[self.idx(j, j)].re;
            for k in lo..j {
                d -= self.band[self.idx(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            let jj = self.idx(j, j);
            self.band[jj] = Complex64::new(d, 0.0);
            for i in j + 1..(j + bw + 1).min(n) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = self.band[self.idx(i, j)];
                for k in lo_i..j {
                    s -= self.band[self.idx(i, k)] * self.band[self.idx(j, k)].conj();
                }
                let ij = self.idx(i, j);
                self.band[ij] = s / d;
            }
        }
        Some(BandedCholesky { factor: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    factor: BandedHermitian,
}

impl BandedCholesky {
    /// Solves L Lᴴ x = b in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let f = &self.factor;
        let (n, bw) = (f.n, f.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for k in lo..i {
                s -= f.band[f.idx(i, k)] * x[k];
            }
            x[i] = s / f.band[f.idx(i, i)].re;
        }
        for i in (0..n).rev() {
            let hi = (i + bw + 1).min(n);
            let mut s = x[i];
            for k in i + 1..hi {
                s -= f.band[f.idx(k, i)].conj() * x[k];
            }
            x[i] = s / f.band[f.idx(i, i)].re;
        }
    }
}

/// Banded Tᴴ A T.
pub fn reduce_banded(red: &BlochReduction, a: &CsrMatrix, gamma: f64) -> Result<BandedHermitian> {
    let mut bw = 0;
    red.for_each_reduced(a, gamma, |p, q, _| bw = bw.max(p.abs_diff(q)))?;
    let mut out = BandedHermitian::zeros(red.reduced_dim(), bw);
    red.for_each_reduced(a, gamma, |p, q, v| out.add(p, q, v))?;
    Ok(out)
}

fn m_dot(mx: &[Complex64], y: &[Complex64]) -> Complex64 {
    // ⟨x, y⟩_M = xᴴ M y with M x precomputed; M Hermitian so (Mx)ᴴ y
    mx.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// The `count` smallest ω on the Bloch pencil via block Krylov shift-invert.
pub fn solve_branches_lanczos(
    red: &BlochReduction,
    k: &CsrMatrix,
    m: &CsrMatrix,
    gamma: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<f64>> {
    let kb = reduce_banded(red, k, gamma)?;
    let mb = reduce_banded(red, m, gamma)?;
    let n = kb.dim();
    if count == 0 || count > n {
        return Err(Error::Eigen {
            gamma,
            reason: format!("requested {count} branches from a pencil of dimension {n}"),
        });
    }
    let chol = kb.cholesky().ok_or_else(|| Error::Eigen {
        gamma,
        reason: "stiffness pencil is not positive definite".into(),
    })?;
    let lambdas = block_krylov(&chol, &mb, n, count, opts).ok_or_else(|| Error::Eigen {
        gamma,
        reason: "block Krylov iteration did not converge".into(),
    })?;
    to_frequencies(gamma, &lambdas, count)
}

fn block_krylov(
    chol: &BandedCholesky,
    mass: &BandedHermitian,
    n: usize,
    count: usize,
    opts: &LanczosOptions,
) -> Option<Vec<f64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let block = opts.block_size.max(1).min(n);
    // Q (M-orthonormal basis), MQ = M Q, AQ = K⁻¹ M Q
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    let mut mq: Vec<Vec<Complex64>> = Vec::new();
    let mut aq: Vec<Vec<Complex64>> = Vec::new();
    let mut pending: Vec<Vec<Complex64>> = (0..block)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        })
        .collect();
    let mut scratch = vec![zero; n];

    loop {
        // orthonormalize the pending block against the basis and itself
        for mut v in pending.drain(..) {
            let norm0 = {
                mass.mul_vec(&v, &mut scratch);
                m_dot(&scratch, &v).re.max(0.0).sqrt()
            };
            for _ in 0..2 {
                for (qi, mqi) in q.iter().zip(&mq) {
                    let c = m_dot(mqi, &v);
                    v.iter_mut().zip(qi).for_each(|(a, b)| *a -= c * b);
                }
            }
            let mut mv = vec![zero; n];
            mass.mul_vec(&v, &mut mv);
            let norm = m_dot(&mv, &v).re.max(0.0).sqrt();
            if !(norm > 1e-10 * norm0) || norm == 0.0 {
                continue;
            }
            v.iter_mut().for_each(|a| *a /= norm);
            mv.iter_mut().for_each(|a| *a /= norm);
            let mut w = mv.clone();
            chol.solve_in_place(&mut w);
            q.push(v);
            mq.push(mv);
            aq.push(w);
        }
        let dim = q.len();
        if dim == 0 {
            return None;
        }

        // Rayleigh-Ritz: H = Qᴴ M (K⁻¹ M Q)
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = m_dot(&mq[i], &aq[j]);
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let wanted = count.min(dim);
        let mut converged = dim >= count;
        if converged && dim < n {
            for &idx in order.iter().take(count) {
                let theta = eig.eigenvalues[idx];
                let s = eig.eigenvectors.column(idx);
                // r = AQ s − θ Q s
                let mut r = vec![zero; n];
                for (c, (aqc, qc)) in aq.iter().zip(&q).enumerate() {
                    let sc = s[c];
                    for t in 0..n {
                        r[t] += sc * (aqc[t] - theta * qc[t]);
                    }
                }
                mass.mul_vec(&r, &mut scratch);
                let res = m_dot(&scratch, &r).re.max(0.0).sqrt();
                if !(res <= opts.tolerance * theta.abs()) {
                    converged = false;
                    break;
                }
            }
        }
        if converged || dim >= n {
            let mut lambdas: Vec<f64> = order.iter().take(wanted).map(|&i| 1.0 / eig.eigenvalues[i]).collect();
            lambdas.sort_by(f64::total_cmp);
            if lambdas.len() < count {
                return None;
            }
            return Some(lambdas);
        }

        // next block: the newest AQ columns
        let start = dim.saturating_sub(block);
        pending = aq[start..].to_vec();
        if pending.is_empty() {
            return None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::assemble;
    use crate::fem::bloch::apply_bloch_with;
    use crate::fem::eigen::solve_branches;
    use crate::fem::mesh::build_mesh;
    use crate::material::{LayerGeometry, Material};

    #[test]
    fn banded_cholesky_solves() {
        let n = 9;
        let mut a = BandedHermitian::zeros(n, 2);
        for i in 0..n {
            a.add(i, i, Complex64::new(6.0, 0.0));
            if i >= 1 {
                a.add(i, i - 1, Complex64::new(-1.0, 0.5));
            }
            if i >= 2 {
                a.add(i, i - 2, Complex64::new(0.3, -0.2));
            }
        }
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        a.mul_vec(&x, &mut b);
        let chol = a.clone().cholesky().unwrap();
        chol.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
        assert_eq!(a.get(0, 1), a.get(1, 0).conj());
    }

    #[test]
    fn matches_dense_path() {
        let g = LayerGeometry::new(0.004, 0.003, 0.0005).unwrap();
        let mesh = build_mesh(&g).unwrap();
        let (k, m) = assemble(&mesh, &Material::soft_tissue(10e3).unwrap()).unwrap();
        let red = BlochReduction::new(&mesh);
        for gamma in [0.0, 250.0, red.max_wavenumber()] {
            let dense = solve_branches(&apply_bloch_with(&red, &k, &m, gamma).unwrap(), 12).unwrap();
            let iter = solve_branches_lanczos(&red, &k, &m, gamma, 12, &LanczosOptions::default()).unwrap();
            for (a, b) in dense.iter().zip(&iter) {
                assert!((a - b).abs() <= 1e-8 * a, "gamma {gamma}: {a} vs {b}");
            }
        }
    }
}
