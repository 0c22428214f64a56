//! Real symmetric positive-definite band matrices and their Cholesky factor.

/// Lower band of a symmetric matrix: row i holds columns i−bw..=i.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedSpd {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds to (i, j) when it lies in the stored lower band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if j <= i && i - j <= self.bw {
            let s = self.slot(i, j);
            self.data[s] += v;
        }
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// In-place LLᵀ; `None` when a pivot is not positive.
    pub fn cholesky(mut self) -> Option<BandedCholeskyReal> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let ri = &self.data[i * w + (k0 + bw - i)..i * w + (j + bw - i)];
                let rj = &self.data[j * w + (k0 + bw - j)..j * w + bw];
                let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                let s = self.data[i * w + (j + bw - i)] - dot;
                let v = if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    s.sqrt()
                } else {
                    s / self.data[j * w + bw]
                };
                self.data[i * w + (j + bw - i)] = v;
            }
        }
        Some(BandedCholeskyReal { l: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholeskyReal {
    l: BandedSpd,
}

impl BandedCholeskyReal {
    /// Solves (LLᵀ) x = b in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let l = &self.l;
        let (n, bw) = (l.n, l.bw);
        let w = bw + 1;
        for i in 0..n {
            let k0 = i.saturating_sub(bw);
            let row = &l.data[i * w + (k0 + bw - i)..i * w + bw];
            let s: f64 = row.iter().zip(&x[k0..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / l.data[i * w + bw];
        }
        for i in (0..n).rev() {
            x[i] /= l.data[i * w + bw];
            let xi = x[i];
            let k0 = i.saturating_sub(bw);
            let row = &l.data[i * w + (k0 + bw - i)..i * w + bw];
            for (xk, a) in x[k0..i].iter_mut().zip(row) {
                *xk -= a * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_solve() {
        let n = 12;
        let bw = 3;
        let mut a = BandedSpd::zeros(n, bw);
        let mut d = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v = if i == j {
                    10.0 + i as f64
                } else {
                    1.0 / (1.0 + (i + 2 * j) as f64)
                };
                a.add(i, j, v);
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        assert_eq!(a.get(2, 4), d[(2, 4)]);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        a.cholesky().unwrap().solve_in_place(&mut x);
        let r = &d * DVector::from_vec(x) - DVector::from_vec(b);
        assert!(r.amax() < 1e-12);
    }

    #[test]
    fn indefinite_rejected() {
        let mut a = BandedSpd::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        assert!(a.cholesky().is_none());
    }
}
