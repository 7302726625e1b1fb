//! Minimal sparse kernels: CSR storage, reverse Cuthill-McKee ordering and a
//! banded complex LU with partial pivoting.
//!
//! The pencils assembled by [`crate::fem`] are real; shifts may be complex, so
//! the factorization path is complex throughout. Problem sizes are desk scale
//! (a few thousand dofs), where a bandwidth-reduced direct factorization is
//! both simple and fast.

mod banded;
mod rcm;

pub use banded::BandedLu;
pub use rcm::{bandwidth, rcm_order};

use num_complex::Complex64;

/// Compressed sparse row matrix. `T` is `f64` or `Complex64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Copy + PartialEq + std::ops::AddAssign + Default> Csr<T> {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(sorted.len());
        for &(r, c, v) in &sorted {
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr {
            nrows,
            ncols,
            row_ptr,
            col_idx: merged.iter().map(|t| t.1).collect(),
            vals: merged.iter().map(|t| t.2).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Row accessor: (column indices, values).
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    /// Entry lookup (binary search within the row).
    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::default(),
        }
    }

    /// Iterate (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals.iter()).map(move |(&c, &v)| (r, c, v))
        })
    }
}

impl Csr<f64> {
    /// y = A x over f64.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// y = A x with a complex vector (A stays real).
    pub fn matvec_c(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![Complex64::default(); self.nrows];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = Complex64::default();
            for (&c, &v) in cols.iter().zip(vals) {
                acc += x[c] * v;
            }
            y[r] = acc;
        }
        y
    }

    /// Linear combination sum_k coeff_k * M_k. All matrices must share shape.
    pub fn combine(terms: &[(f64, &Csr<f64>)]) -> Csr<f64> {
        assert!(!terms.is_empty());
        let (nr, nc) = (terms[0].1.nrows, terms[0].1.ncols);
        let mut trip = Vec::new();
        for &(coef, m) in terms {
            assert_eq!((m.nrows, m.ncols), (nr, nc), "combine: shape mismatch");
            for (r, c, v) in m.iter() {
                trip.push((r, c, coef * v));
            }
        }
        Csr::from_triplets(nr, nc, &trip)
    }

    /// Exact transpose.
    pub fn transpose(&self) -> Csr<f64> {
        let trip: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Csr::from_triplets(self.ncols, self.nrows, &trip)
    }

    /// Symmetrize: (A + A^T)/2.
    pub fn symmetrized(&self) -> Csr<f64> {
        assert_eq!(self.nrows, self.ncols);
        let mut trip = Vec::with_capacity(2 * self.nnz());
        for (r, c, v) in self.iter() {
            trip.push((r, c, 0.5 * v));
            trip.push((c, r, 0.5 * v));
        }
        Csr::from_triplets(self.nrows, self.ncols, &trip)
    }

    /// Max absolute row sum (infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Dense complex copy (for the dense eigenvalue oracle).
    pub fn to_dense_c(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += Complex64::new(v, 0.0);
        }
        m
    }

    /// Complex copy with the same sparsity.
    pub fn to_complex(&self) -> Csr<Complex64> {
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals: self.vals.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl Csr<Complex64> {
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![Complex64::default(); self.nrows];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = Complex64::default();
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// A - sigma*B with real A, B; pattern is the union.
    pub fn shifted(a: &Csr<f64>, b: &Csr<f64>, sigma: Complex64) -> Csr<Complex64> {
        assert_eq!((a.nrows, a.ncols), (b.nrows, b.ncols));
        let mut trip: Vec<(usize, usize, Complex64)> = Vec::with_capacity(a.nnz() + b.nnz());
        for (r, c, v) in a.iter() {
            trip.push((r, c, Complex64::new(v, 0.0)));
        }
        for (r, c, v) in b.iter() {
            trip.push((r, c, -sigma * v));
        }
        Csr::from_triplets(a.nrows, a.ncols, &trip)
    }

    /// Symmetric permutation P A P^T. `perm[new] = old`.
    pub fn permute_sym(&self, perm: &[usize]) -> Csr<Complex64> {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(perm.len(), self.nrows);
        let mut inv = vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let trip: Vec<_> = self.iter().map(|(r, c, v)| (inv[r], inv[c], v)).collect();
        Csr::from_triplets(self.nrows, self.ncols, &trip)
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugated dot product `x^H y`.
pub fn dot_h(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn empty_rows_are_consistent() {
        let m = Csr::from_triplets(4, 3, &[(2, 1, 5.0)]);
        assert_eq!(m.row(0).0.len(), 0);
        assert_eq!(m.row(1).0.len(), 0);
        assert_eq!(m.row(2).0, &[1]);
        assert_eq!(m.row(3).0.len(), 0);
        let y = m.matvec(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![0.0, 0.0, 10.0, 0.0]);
    }

    #[test]
    fn combine_and_transpose() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0)]);
        let b = Csr::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 4.0)]);
        let s = Csr::combine(&[(1.0, &a), (-2.0, &b)]);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(1, 0), -8.0);
        let t = s.transpose();
        assert_eq!(t.get(0, 1), -8.0);
    }

    #[test]
    fn shifted_merges_patterns() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 2.0)]);
        let b = Csr::from_triplets(2, 2, &[(1, 1, 1.0)]);
        let s = Csr::<Complex64>::shifted(&a, &b, Complex64::new(0.0, 1.0));
        assert_eq!(s.get(0, 0), Complex64::new(2.0, 0.0));
        assert_eq!(s.get(1, 1), Complex64::new(0.0, -1.0));
    }
}
