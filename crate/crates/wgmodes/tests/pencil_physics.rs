//! Eigenvalue pencils against the dense oracle, the analytic rectangle
//! dispersion and the formulation cross-check.

mod common;

use common::{pec_tags, rect_fixture};
use num_complex::Complex64;
use wgmodes::analytic::{rect_beta, RectKind};
use wgmodes::eigen::{
    cutoff_distance, dense_oracle_eigs, pencil_residual, shift_invert_arnoldi, ShiftInvertOpts,
};
use wgmodes::fem::{assemble_blocks, build_dofmap, pencil_vd1, pencil_vd2, scalar_helmholtz};
use wgmodes::materials::MaterialMap;
use wgmodes::mesh::{generate_rect_mesh, refine_uniform};

const OMEGA: f64 = 6.5;

fn solve_vd1(fx: &common::Fixture, nev: usize) -> Vec<wgmodes::eigen::RitzPair> {
    let (a1, b1) = pencil_vd1(&fx.blocks, OMEGA);
    let mut opts = ShiftInvertOpts::new(Complex64::new(OMEGA * OMEGA, 0.0), nev);
    opts.krylov_dim = (2 * nev + 30).min(a1.nrows());
    shift_invert_arnoldi(&a1, &b1, &opts).unwrap()
}

#[test]
fn arnoldi_matches_dense_oracle_on_the_pencil() {
    // two meshes under the 500-dof oracle budget
    for (nx, ny) in [(8, 4), (16, 8)] {
        let fx = rect_fixture(nx, ny);
        let n = fx.blocks.n_edge_dofs + fx.blocks.n_vertex_dofs;
        assert!(n <= 500, "oracle fixture must stay small, got {n}");
        let (a1, b1) = pencil_vd1(&fx.blocks, OMEGA);
        let sigma = Complex64::new(OMEGA * OMEGA, 0.0);
        let pairs = solve_vd1(&fx, 10);
        let oracle = dense_oracle_eigs(&a1, &b1, sigma, 500).unwrap();
        for k in 0..10 {
            let rel = (pairs[k].lambda - oracle[k]).norm() / oracle[k].norm();
            assert!(
                rel < 1e-8,
                "mesh {nx}x{ny} eigenvalue {k}: arnoldi {} vs oracle {} (rel {rel:.2e})",
                pairs[k].lambda,
                oracle[k]
            );
        }
        // oracle sees exactly n_e finite eigenvalues (rank of B1)
        assert_eq!(oracle.len(), fx.blocks.n_edge_dofs);
        // residual contract on accepted pairs, relative to the operator scale
        for p in &pairs {
            let scale = a1.norm_inf() + p.lambda.norm() * b1.norm_inf();
            assert!(pencil_residual(&a1, &b1, p.lambda, &p.vector) <= 1e-10 * scale);
        }
    }
}

#[test]
fn discrete_betas_approach_the_analytic_dispersion() {
    let te10 = rect_beta(RectKind::Te, 1, 0, 1.0, 0.5, OMEGA, 1.0, 1.0).unwrap();
    let te01 = rect_beta(RectKind::Te, 0, 1, 1.0, 0.5, OMEGA, 1.0, 1.0).unwrap();
    let fx = rect_fixture(16, 8);
    let pairs = solve_vd1(&fx, 12);
    let mut props: Vec<f64> = pairs
        .iter()
        .filter(|p| p.lambda.re > 0.0 && p.lambda.im.abs() < 1e-8 * p.lambda.norm())
        .map(|p| p.lambda.re)
        .collect();
    props.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert_eq!(props.len(), 3, "three propagating modes at omega = 6.5");
    // h = 1/16: generous bounds; the tight 1% check at h = 1/32 is acceptance
    assert!((props[0].sqrt() - te10.sqrt()).abs() / te10.sqrt() < 1e-3);
    assert!((props[1].sqrt() - te01.sqrt()).abs() / te01.sqrt() < 0.05);
    // accidental TE01/TE20 degeneracy survives on the symmetric mesh
    assert!((props[1] - props[2]).abs() < 1e-9 * props[1]);
}

#[test]
fn vd1_and_vd2_share_their_finite_spectrum_and_eigenvectors() {
    let fx = rect_fixture(8, 4);
    let (a2, b2) = pencil_vd2(&fx.blocks, OMEGA);
    let pairs1 = solve_vd1(&fx, 10);
    let mut opts = ShiftInvertOpts::new(Complex64::new(OMEGA * OMEGA, 0.0), 10);
    opts.krylov_dim = 50;
    let pairs2 = shift_invert_arnoldi(&a2, &b2, &opts).unwrap();

    let ne = fx.blocks.n_edge_dofs;
    for p1 in pairs1.iter().take(10) {
        // eigenvalue match within 1e-6 relative (observed: ~1e-13)
        let (best, q2) = pairs2
            .iter()
            .map(|q| ((q.lambda - p1.lambda).norm() / p1.lambda.norm().max(1.0), q))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap();
        assert!(best < 1e-6, "vd2 missing lambda = {}", p1.lambda);

        // transverse eigenvector components agree up to a complex scalar,
        // except inside degenerate eigenspaces where any basis is valid
        let degenerate = pairs1
            .iter()
            .filter(|r| (r.lambda - p1.lambda).norm() < 1e-6 * p1.lambda.norm().max(1.0))
            .count()
            > 1;
        if degenerate {
            continue;
        }
        let u1 = &p1.vector[..ne];
        let u2 = &q2.vector[..ne];
        let dot: Complex64 = u1.iter().zip(u2).map(|(a, b)| a.conj() * b).sum();
        let n1: f64 = u1.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let n2: f64 = u2.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let cos = (dot.norm() / (n1 * n2)).min(1.0);
        let angle = cos.acos();
        assert!(
            angle < 1e-6,
            "eigenvector angle {angle:.2e} rad at lambda = {}",
            p1.lambda
        );
    }
}

#[test]
fn cutoff_distance_behaves_across_frequencies() {
    let fx = rect_fixture(16, 8);
    // omega = 6.5 sits between cutoffs: nearest TM cutoff is 5 pi^2 ~ 49.35
    // against omega^2 = 42.25, plus an O(h^2) discrete shift upward
    let d = cutoff_distance(&fx.blocks, OMEGA).unwrap();
    assert!(d > 0.1 && d < 0.3, "distance at 6.5: {d}");

    // omega -> 0: distance ~ (smallest Dirichlet eigenvalue) / omega^2, large
    let d0 = cutoff_distance(&fx.blocks, 0.5).unwrap();
    assert!(d0 > 100.0, "distance at 0.5: {d0}");
}

#[test]
fn cutoff_distance_vanishes_at_a_discrete_dirichlet_eigenvalue() {
    // unit square, eps = mu = 1: the first Dirichlet eigenvalue of the
    // discrete (Kv, Mv) converges to 2 pi^2; driving omega^2 onto the
    // *discrete* eigenvalue makes the distance collapse at every level
    let mut mesh = generate_rect_mesh(1.0, 1.0, 8, 8).unwrap();
    let mut discrete_eigs = Vec::new();
    for _ in 0..3 {
        let dm = build_dofmap(&mesh, &pec_tags()).unwrap();
        let blocks = assemble_blocks(&mesh, &dm, &MaterialMap::uniform(1.0, 1.0)).unwrap();

        // smallest discrete Dirichlet eigenvalue via shift-invert near 2 pi^2
        let mut opts = ShiftInvertOpts::new(Complex64::new(19.0, 0.0), 1);
        opts.krylov_dim = 30.min(blocks.n_vertex_dofs);
        let pairs = shift_invert_arnoldi(&blocks.kv, &blocks.mv, &opts).unwrap();
        let lam_h = pairs[0].lambda.re;
        discrete_eigs.push(lam_h);

        let omega_on = lam_h.sqrt();
        let d = cutoff_distance(&blocks, omega_on).unwrap();
        assert!(d < 1e-9, "distance at the discrete eigenvalue: {d:.3e}");

        // the scalar Helmholtz operator is singular exactly there: solving
        // at a nearby regular omega works fine
        let _ = scalar_helmholtz(&blocks, omega_on);
        mesh = refine_uniform(&mesh).unwrap();
    }
    // discrete eigenvalues converge to 2 pi^2 from above at second order
    let exact = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
    let errs: Vec<f64> = discrete_eigs.iter().map(|l| l - exact).collect();
    assert!(
        errs.iter().all(|&e| e > 0.0),
        "P1 eigenvalues from above: {errs:?}"
    );
    let order = (errs[0] / errs[1]).log2();
    let order2 = (errs[1] / errs[2]).log2();
    assert!(order > 1.8 && order2 > 1.8, "orders {order:.2} {order2:.2}");
}

#[test]
fn tiny_mesh_still_solves() {
    // 1x1-cell rectangle: one free edge, zero free vertices
    let fx = rect_fixture(1, 1);
    assert_eq!(fx.blocks.n_edge_dofs, 1);
    assert_eq!(fx.blocks.n_vertex_dofs, 0);
    let (a1, b1) = pencil_vd1(&fx.blocks, OMEGA);
    let opts = ShiftInvertOpts::new(Complex64::new(OMEGA * OMEGA, 0.0), 1);
    let pairs = shift_invert_arnoldi(&a1, &b1, &opts).unwrap();
    assert_eq!(pairs.len(), 1);
    assert!(pairs[0].lambda.im.abs() < 1e-10);
    // no vertex dofs means no discrete TM cutoffs
    assert!(cutoff_distance(&fx.blocks, OMEGA).unwrap().is_infinite());
}
