//! Banded complex LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` convention: entry (i, j) of the matrix
//! lives at `ab[kl + ku + i - j][j]` for `j - ku <= i <= j + kl`, with `kl`
//! extra super-diagonal rows reserved for pivoting fill.

use crate::{Error, Result};
use num_complex::Complex64;

use super::Csr;

pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// row-major band array, (2*kl + ku + 1) rows of length n
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Factor a square complex CSR matrix in place of its band.
    pub fn factor(m: &Csr<Complex64>) -> Result<BandedLu> {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "banded LU needs a square matrix");
        if n == 0 {
            return Ok(BandedLu {
                n,
                kl: 0,
                ku: 0,
                ab: Vec::new(),
                ipiv: Vec::new(),
            });
        }
        let mut kl = 0usize;
        let mut ku = 0usize;
        let mut max_abs = 0.0f64;
        for (r, c, v) in m.iter() {
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
            max_abs = max_abs.max(v.norm());
        }
        if max_abs == 0.0 {
            return Err(Error::Factorization("matrix is identically zero".into()));
        }
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![Complex64::default(); ldab * n];
        let at = |i: usize, j: usize| (kl + ku + i - j) * n + j;
        for (r, c, v) in m.iter() {
            ab[at(r, c)] = v;
        }
        let mut ipiv = vec![0usize; n];
        let pivot_tol = max_abs * f64::EPSILON * (n as f64);
        let ku_eff = kl + ku; // fill widens the upper band

        for j in 0..n {
            // partial pivot within column j, rows j..=j+kl
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = ab[at(j, j)].norm();
            for i in (j + 1)..=last {
                let a = ab[at(i, j)].norm();
                if a > best {
                    best = a;
                    p = i;
                }
            }
            if best <= pivot_tol {
                return Err(Error::Factorization(format!(
                    "zero pivot at column {j} (|pivot| = {best:.3e}); shift may coincide with an eigenvalue"
                )));
            }
            ipiv[j] = p;
            let ccap = (j + ku_eff).min(n - 1);
            if p != j {
                for c in j..=ccap {
                    ab.swap(at(j, c), at(p, c));
                }
            }
            let piv = ab[at(j, j)];
            for i in (j + 1)..=last {
                let l = ab[at(i, j)] / piv;
                ab[at(i, j)] = l;
                if l != Complex64::default() {
                    for c in (j + 1)..=ccap {
                        let u = ab[at(j, c)];
                        ab[at(i, c)] -= l * u;
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            ab,
            ipiv,
        })
    }

    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        if self.n == 0 {
            return;
        }
        let n = self.n;
        let kl = self.kl;
        let ku_eff = self.kl + self.ku;
        let at = |i: usize, j: usize| (kl + self.ku + i - j) * n + j;
        // forward: apply pivots and L
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let last = (j + kl).min(n - 1);
            let bj = b[j];
            for i in (j + 1)..=last {
                b[i] -= self.ab[at(i, j)] * bj;
            }
        }
        // backward: U x = y
        for j in (0..n).rev() {
            let ccap = (j + ku_eff).min(n - 1);
            let mut acc = b[j];
            for c in (j + 1)..=ccap {
                acc -= self.ab[at(j, c)] * b[c];
            }
            b[j] = acc / self.ab[at(j, j)];
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}
