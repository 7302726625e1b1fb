//! Dense complex eigenvalue routines: the full-spectrum brute-force oracle
//! for small pencils and the projected-problem eigensolver used inside the
//! Arnoldi iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::sparse::Csr;
use crate::{Error, Result};

/// Default dimension cap for [`dense_oracle_eigs`].
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// Schur with a deflation-tolerance ladder: the QR iteration is backward
/// stable at any of these, but the tightest setting can fail to deflate on
/// large clustered spectra.
fn schur_ladder(
    m: &DMatrix<Complex64>,
) -> Option<nalgebra::linalg::Schur<Complex64, nalgebra::Dyn>> {
    let n = m.nrows();
    for eps in [1e-14, 1e-13, 3e-13] {
        if let Some(s) = m.clone().try_schur(eps, 100 * n.max(100)) {
            return Some(s);
        }
    }
    None
}

/// Eigenvalues and eigenvectors of a dense complex matrix.
///
/// Schur triangularization followed by back-substitution for the eigenvectors
/// of the triangular factor. Tiny denominators from (numerically) repeated
/// eigenvalues are perturbed at machine scale, the standard guard.
pub fn eig_dense(m: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((vec![m[(0, 0)]], DMatrix::identity(1, 1)));
    }
    let schur = schur_ladder(m).ok_or(Error::NonConvergence {
        wanted: n,
        converged: 0,
        worst_residual: f64::NAN,
    })?;
    let (q, t) = schur.unpack();
    let tnorm = t.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let eigs: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    let mut z = vec![Complex64::default(); n];
    for i in 0..n {
        for zk in z.iter_mut() {
            *zk = Complex64::default();
        }
        z[i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = Complex64::default();
            for k in (j + 1)..=i {
                s += t[(j, k)] * z[k];
            }
            let mut d = t[(j, j)] - eigs[i];
            if d.norm() < f64::EPSILON * tnorm {
                d = Complex64::new(f64::EPSILON * tnorm, 0.0);
            }
            z[j] = -s / d;
        }
        let zn = nalgebra::DVector::from_column_slice(&z);
        let mut x = &q * zn;
        let nrm = x.norm();
        if nrm > 0.0 {
            x /= Complex64::new(nrm, 0.0);
        }
        vecs.set_column(i, &x);
    }
    Ok((eigs, vecs))
}

/// Brute-force finite spectrum of the pencil `A x = lambda B x`.
///
/// Forms `M = (A - sigma B)^{-1} B` densely, takes its full spectrum, drops
/// `|theta|` below the relative floor (infinite eigenvalues from a singular
/// `B`), and maps back via `lambda = sigma + 1/theta`. The result is sorted
/// by distance to the shift.
pub fn dense_oracle_eigs(
    a: &Csr<f64>,
    b: &Csr<f64>,
    sigma: Complex64,
    cap: usize,
) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Dimension(
            "dense oracle needs square matching matrices".into(),
        ));
    }
    if n > cap {
        return Err(Error::InvalidArgument(format!(
            "dense oracle dimension cap exceeded: {n} > {cap}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut shifted = a.to_dense_c();
    let bd = b.to_dense_c();
    shifted -= bd.clone() * sigma;
    let lu = shifted.lu();
    let m = lu
        .solve(&bd)
        .ok_or_else(|| Error::Factorization("A - sigma B is singular".into()))?;
    let schur = schur_ladder(&m).ok_or(Error::NonConvergence {
        wanted: n,
        converged: 0,
        worst_residual: f64::NAN,
    })?;
    let (_, t) = schur.unpack();
    let thetas: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let theta_max = thetas.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 1e-10 * theta_max;
    let mut lambdas: Vec<Complex64> = thetas
        .iter()
        .filter(|t| t.norm() > floor)
        .map(|t| sigma + t.inv())
        .collect();
    lambdas.sort_by(|p, q| {
        (p - sigma)
            .norm()
            .partial_cmp(&(q - sigma).norm())
            .unwrap()
            .then(p.re.partial_cmp(&q.re).unwrap())
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    Ok(lambdas)
}
