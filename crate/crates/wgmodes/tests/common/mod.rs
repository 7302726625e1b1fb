//! Shared fixtures and the independent dense-quadrature assembly oracle.
//!
//! The oracle integrates every bilinear form by Duffy-transformed 8x8
//! Gauss-Legendre quadrature (exact to polynomial degree 15 on the triangle)
//! with its own basis-function evaluation, sharing nothing with the
//! production assembly path except the mesh bookkeeping it checks against.

#![allow(dead_code)]

use std::collections::BTreeSet;

use wgmodes::fem::{assemble_blocks, build_dofmap, DofMap, PencilBlocks};
use wgmodes::materials::MaterialMap;
use wgmodes::mesh::{generate_rect_mesh, Mesh};

pub fn pec_tags() -> BTreeSet<String> {
    BTreeSet::from(["pec".to_string()])
}

pub struct Fixture {
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub blocks: PencilBlocks,
    pub materials: MaterialMap,
}

pub fn rect_fixture(nx: usize, ny: usize) -> Fixture {
    rect_fixture_with(nx, ny, MaterialMap::uniform(1.0, 1.0))
}

pub fn rect_fixture_with(nx: usize, ny: usize, materials: MaterialMap) -> Fixture {
    let mesh = generate_rect_mesh(1.0, 0.5, nx, ny).unwrap();
    let dofmap = build_dofmap(&mesh, &pec_tags()).unwrap();
    let blocks = assemble_blocks(&mesh, &dofmap, &materials).unwrap();
    Fixture {
        mesh,
        dofmap,
        blocks,
        materials,
    }
}

/// 8-point Gauss-Legendre rule mapped to [0, 1].
pub fn gauss8_unit() -> [(f64, f64); 8] {
    const X: [f64; 4] = [
        0.1834346424956498,
        0.525532409916329,
        0.7966664774136267,
        0.9602898564975363,
    ];
    const W: [f64; 4] = [
        0.362683783378362,
        0.3137066458778873,
        0.2223810344533745,
        0.1012285362903763,
    ];
    let mut out = [(0.0, 0.0); 8];
    for k in 0..4 {
        out[2 * k] = (0.5 * (1.0 - X[k]), 0.5 * W[k]);
        out[2 * k + 1] = (0.5 * (1.0 + X[k]), 0.5 * W[k]);
    }
    out
}

/// Dense assembly of all eight blocks by brute-force quadrature.
pub struct DenseBlocks {
    pub c: Vec<Vec<f64>>,
    pub me: Vec<Vec<f64>>,
    pub mmu: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub gdiv: Vec<Vec<f64>>,
    pub mv: Vec<Vec<f64>>,
    pub kv: Vec<Vec<f64>>,
}

fn zeros(r: usize, c: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; c]; r]
}

/// Quadrature points of the Duffy-transformed product rule on one triangle:
/// barycentric coordinates and physical weights.
fn duffy_points(area: f64) -> Vec<([f64; 3], f64)> {
    let g = gauss8_unit();
    let mut out = Vec::with_capacity(64);
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            let u = s;
            let v = t * (1.0 - s);
            let jac = 1.0 - s;
            out.push(([1.0 - u - v, u, v], 2.0 * area * ws * wt * jac));
        }
    }
    out
}

pub fn oracle_assemble(mesh: &Mesh, dofmap: &DofMap, materials: &MaterialMap) -> DenseBlocks {
    let ne = dofmap.n_edge_dofs();
    let nv = dofmap.n_vertex_dofs();
    let mut b = DenseBlocks {
        c: zeros(ne, ne),
        me: zeros(ne, ne),
        mmu: zeros(ne, ne),
        g: zeros(ne, nv),
        d: zeros(nv, ne),
        gdiv: zeros(nv, ne),
        mv: zeros(nv, nv),
        kv: zeros(nv, nv),
    };
    for t in 0..mesh.n_triangles() {
        let tri = &mesh.triangles[t];
        let [p0, p1, p2] = mesh.triangle_coords(t);
        let two_a = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
        let area = 0.5 * two_a;
        // barycentric gradients, computed here independently
        let grad = [
            [(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a],
            [(p2[1] - p0[1]) / two_a, (p0[0] - p2[0]) / two_a],
            [(p0[1] - p1[1]) / two_a, (p1[0] - p0[0]) / two_a],
        ];
        let local_edges = [(0usize, 1usize), (1, 2), (2, 0)];
        let curls: Vec<f64> = local_edges
            .iter()
            .map(|&(i, j)| 2.0 * (grad[i][0] * grad[j][1] - grad[i][1] * grad[j][0]))
            .collect();
        let mat = materials.region(&tri.region).unwrap();
        let te = mesh.tri_edges(t);
        let edofs: Vec<Option<(usize, f64)>> = (0..3)
            .map(|k| dofmap.edge_dof[te[k].0].map(|d| (d, te[k].1)))
            .collect();
        let vdofs: Vec<Option<usize>> = (0..3).map(|k| dofmap.vertex_dof[tri.v[k]]).collect();

        for (bary, wt) in duffy_points(area) {
            let eps = mat.epsilon.eval(tri.v, bary).unwrap();
            let mu = mat.mu.eval(tri.v, bary).unwrap();
            let mu_inv = 1.0 / mu;
            let w: Vec<[f64; 2]> = local_edges
                .iter()
                .map(|&(i, j)| {
                    [
                        bary[i] * grad[j][0] - bary[j] * grad[i][0],
                        bary[i] * grad[j][1] - bary[j] * grad[i][1],
                    ]
                })
                .collect();
            for e in 0..3 {
                let Some((ge, se)) = edofs[e] else { continue };
                for f in 0..3 {
                    if let Some((gf, sf)) = edofs[f] {
                        let dot = w[e][0] * w[f][0] + w[e][1] * w[f][1];
                        b.c[ge][gf] += wt * se * sf * mu_inv * curls[e] * curls[f];
                        b.me[ge][gf] += wt * se * sf * eps * dot;
                        b.mmu[ge][gf] += wt * se * sf * mu_inv * dot;
                    }
                }
                for k in 0..3 {
                    if let Some(gk) = vdofs[k] {
                        let wg = w[e][0] * grad[k][0] + w[e][1] * grad[k][1];
                        b.g[ge][gk] += wt * se * mu_inv * wg;
                        b.d[gk][ge] -= wt * se * eps * wg;
                        b.gdiv[gk][ge] += wt * se * mu_inv * wg;
                    }
                }
            }
            for k in 0..3 {
                let Some(gk) = vdofs[k] else { continue };
                for l in 0..3 {
                    if let Some(gl) = vdofs[l] {
                        b.mv[gk][gl] += wt * eps * bary[k] * bary[l];
                        b.kv[gk][gl] +=
                            wt * mu_inv * (grad[k][0] * grad[l][0] + grad[k][1] * grad[l][1]);
                    }
                }
            }
        }
    }
    b
}

/// Integrate a scalar function over the mesh with the oracle rule.
pub fn oracle_integrate<F>(mesh: &Mesh, f: F) -> f64
where
    F: Fn(usize, [f64; 3], [f64; 2]) -> f64,
{
    let mut acc = 0.0;
    for t in 0..mesh.n_triangles() {
        let [p0, p1, p2] = mesh.triangle_coords(t);
        let area = mesh.triangle_area(t);
        for (bary, wt) in duffy_points(area) {
            let p = [
                bary[0] * p0[0] + bary[1] * p1[0] + bary[2] * p2[0],
                bary[0] * p0[1] + bary[1] * p1[1] + bary[2] * p2[1],
            ];
            acc += wt * f(t, bary, p);
        }
    }
    acc
}

/// Largest entrywise deviation relative to the block's own magnitude.
pub fn block_mismatch(sparse: &wgmodes::sparse::Csr<f64>, dense: &[Vec<f64>]) -> f64 {
    let scale = dense
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut worst = 0.0f64;
    for (r, row) in dense.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            worst = worst.max((sparse.get(r, c) - v).abs());
        }
    }
    worst / scale
}
