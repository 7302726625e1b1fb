//! The two linear eigenvalue pencils in `lambda = beta^2`, the modal
//! orthogonality form and the scalar Helmholtz operator.
//!
//! Both pencils act on the stacked vector `x = (u, p)` with `u` the edge
//! coefficients of the transverse field and `p` the vertex coefficients of
//! the scaled longitudinal field (`p` discretizes `i beta E_3`).
//!
//! Pencil 1 (the one advocated for computation):
//!
//! ```text
//! A1 = [ C - w^2 Me   G  ]      B1 = [ -Mmu  0 ]
//!      [ D            Mv ]           [  0    0 ]
//! ```
//!
//! Its second row is the weak divergence constraint. Pencil 2 replaces that
//! row with the weak scalar Helmholtz equation:
//!
//! ```text
//! A2 = [ C - w^2 Me   G             ]      B2 = [ -Mmu   0 ]
//!      [ 0            -Kv + w^2 Mv  ]           [  Gdiv  0 ]
//! ```
//!
//! The two pencils share their finite spectrum; the cross-check is part of
//! the verification suite rather than an assumption.

use num_complex::Complex64;

use crate::sparse::Csr;

use super::assembly::PencilBlocks;

fn block_2x2(ne: usize, nv: usize, parts: &[(f64, &Csr<f64>, usize, usize)]) -> Csr<f64> {
    let n = ne + nv;
    let mut trip = Vec::new();
    for &(coef, m, roff, coff) in parts {
        for (r, c, v) in m.iter() {
            trip.push((r + roff, c + coff, coef * v));
        }
    }
    Csr::from_triplets(n, n, &trip)
}

/// Pencil from the divergence-constraint formulation: `A1 x = lambda B1 x`
/// with `lambda = beta^2`.
pub fn pencil_vd1(blocks: &PencilBlocks, omega: f64) -> (Csr<f64>, Csr<f64>) {
    let (ne, nv) = (blocks.n_edge_dofs, blocks.n_vertex_dofs);
    let w2 = omega * omega;
    let a = block_2x2(
        ne,
        nv,
        &[
            (1.0, &blocks.c, 0, 0),
            (-w2, &blocks.me, 0, 0),
            (1.0, &blocks.g, 0, ne),
            (1.0, &blocks.d, ne, 0),
            (1.0, &blocks.mv, ne, ne),
        ],
    );
    let b = block_2x2(ne, nv, &[(-1.0, &blocks.mmu, 0, 0)]);
    (a, b)
}

/// Pencil from the scalar-Helmholtz formulation: `A2 x = lambda B2 x`.
pub fn pencil_vd2(blocks: &PencilBlocks, omega: f64) -> (Csr<f64>, Csr<f64>) {
    let (ne, nv) = (blocks.n_edge_dofs, blocks.n_vertex_dofs);
    let w2 = omega * omega;
    let a = block_2x2(
        ne,
        nv,
        &[
            (1.0, &blocks.c, 0, 0),
            (-w2, &blocks.me, 0, 0),
            (1.0, &blocks.g, 0, ne),
            (-1.0, &blocks.kv, ne, ne),
            (w2, &blocks.mv, ne, ne),
        ],
    );
    let b = block_2x2(
        ne,
        nv,
        &[(-1.0, &blocks.mmu, 0, 0), (1.0, &blocks.gdiv, ne, 0)],
    );
    (a, b)
}

/// The modal pairing `a(x, y) = y^H (C - w^2 Me) x`, conjugate-linear in `y`.
///
/// Eigenvectors whose `beta^2` values are not conjugate to each other are
/// orthogonal under this form; it also provides the mode normalization and
/// the Dirichlet-to-Neumann boundary term.
pub fn a_orth(blocks: &PencilBlocks, omega: f64, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), blocks.n_edge_dofs);
    assert_eq!(y.len(), blocks.n_edge_dofs);
    let w2 = omega * omega;
    let cx = blocks.c.matvec_c(x);
    let mx = blocks.me.matvec_c(x);
    let mut acc = Complex64::default();
    for i in 0..x.len() {
        acc += y[i].conj() * (cx[i] - w2 * mx[i]);
    }
    acc
}

/// The discrete Dirichlet scalar Helmholtz operator `Kv - w^2 Mv`.
///
/// Singular exactly when `w^2` is a discrete Dirichlet eigenvalue of
/// `(Kv, Mv)`, which is the cutoff condition the solver rejects.
pub fn scalar_helmholtz(blocks: &PencilBlocks, omega: f64) -> Csr<f64> {
    Csr::combine(&[(1.0, &blocks.kv), (-omega * omega, &blocks.mv)])
}
