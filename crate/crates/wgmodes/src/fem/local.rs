//! Per-element matrices for one triangle.
//!
//! Local edges are `(v0,v1), (v1,v2), (v2,v0)`, each oriented from its first
//! to its second vertex; assembly flips signs where the local direction
//! disagrees with the global low-to-high orientation. The Whitney function of
//! edge `(i,j)` is `W = l_i grad(l_j) - l_j grad(l_i)` with barycentric
//! coordinates `l`; its scalar curl `2 (grad l_i x grad l_j)` is constant.
//!
//! Sign convention: the vertex-row coupling block is `D = -<eps phi, grad psi>`,
//! the form obtained by integrating the divergence constraint by parts
//! against a vertex test function vanishing on the boundary. Keeping the
//! minus sign here, once, protects every consumer from silent sign drift.

use crate::quadrature::tri7;
use crate::{Error, Result};

/// Local edge vertex pairs in assembly order.
pub const LOCAL_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// The eight local blocks. Edge-indexed dimensions come first where mixed.
#[derive(Debug, Clone, Default)]
pub struct LocalBlocks {
    /// `<mu^-1 curl W_f, curl W_e>` (edge x edge)
    pub c: [[f64; 3]; 3],
    /// `<eps W_f, W_e>` (edge x edge)
    pub me: [[f64; 3]; 3],
    /// `<mu^-1 W_f, W_e>` (edge x edge)
    pub mmu: [[f64; 3]; 3],
    /// `<mu^-1 grad psi_k, W_e>` (edge x vertex)
    pub g: [[f64; 3]; 3],
    /// `-<eps W_e, grad psi_k>` (vertex x edge)
    pub d: [[f64; 3]; 3],
    /// `<mu^-1 W_e, grad psi_k>` (vertex x edge)
    pub gdiv: [[f64; 3]; 3],
    /// `<eps psi_l, psi_k>` (vertex x vertex)
    pub mv: [[f64; 3]; 3],
    /// `<mu^-1 grad psi_l, grad psi_k>` (vertex x vertex)
    pub kv: [[f64; 3]; 3],
}

/// Barycentric gradients and doubled area of a triangle.
fn tri_geometry(coords: &[[f64; 2]; 3]) -> Result<([[f64; 2]; 3], f64)> {
    let [p0, p1, p2] = *coords;
    let two_a = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    if !(two_a > 0.0) || !two_a.is_finite() {
        return Err(Error::MeshInvalid(format!(
            "degenerate triangle with doubled area {two_a:.3e}"
        )));
    }
    let g = [
        [(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a],
        [(p2[1] - p0[1]) / two_a, (p0[0] - p2[0]) / two_a],
        [(p0[1] - p1[1]) / two_a, (p1[0] - p0[0]) / two_a],
    ];
    Ok((g, two_a))
}

/// Evaluate the three local Whitney functions at a barycentric point.
pub fn whitney_at(coords: &[[f64; 2]; 3], bary: [f64; 3]) -> [[f64; 2]; 3] {
    let (g, _) = tri_geometry(coords).expect("valid triangle");
    let mut w = [[0.0; 2]; 3];
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        w[e] = [
            bary[i] * g[j][0] - bary[j] * g[i][0],
            bary[i] * g[j][1] - bary[j] * g[i][1],
        ];
    }
    w
}

/// Compute all eight local blocks for one triangle.
///
/// `eps_q` and `mu_q` hold the material values at the seven quadrature points
/// of the fixed rule, in rule order.
pub fn local_element_matrices(
    coords: &[[f64; 2]; 3],
    eps_q: &[f64; 7],
    mu_q: &[f64; 7],
) -> Result<LocalBlocks> {
    let (g, two_a) = tri_geometry(coords)?;
    let area = 0.5 * two_a;
    for q in 0..7 {
        if !(eps_q[q] > 0.0 && mu_q[q] > 0.0) {
            return Err(Error::Material(format!(
                "material values must be positive at quadrature points (eps={}, mu={})",
                eps_q[q], mu_q[q]
            )));
        }
    }

    let mut curls = [0.0; 3];
    for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        curls[e] = 2.0 * (g[i][0] * g[j][1] - g[i][1] * g[j][0]);
    }

    let mut out = LocalBlocks::default();
    for (q, (bary, wq)) in tri7().iter().enumerate() {
        let wt = wq * area;
        let eps = eps_q[q];
        let mu_inv = 1.0 / mu_q[q];

        let mut w = [[0.0; 2]; 3];
        for (e, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
            w[e] = [
                bary[i] * g[j][0] - bary[j] * g[i][0],
                bary[i] * g[j][1] - bary[j] * g[i][1],
            ];
        }

        for e in 0..3 {
            for f in 0..3 {
                let dot = w[e][0] * w[f][0] + w[e][1] * w[f][1];
                out.c[e][f] += wt * mu_inv * curls[e] * curls[f];
                out.me[e][f] += wt * eps * dot;
                out.mmu[e][f] += wt * mu_inv * dot;
            }
            for k in 0..3 {
                let wg = w[e][0] * g[k][0] + w[e][1] * g[k][1];
                out.g[e][k] += wt * mu_inv * wg;
                out.d[k][e] -= wt * eps * wg;
                out.gdiv[k][e] += wt * mu_inv * wg;
            }
        }
        for k in 0..3 {
            for l in 0..3 {
                out.mv[k][l] += wt * eps * bary[k] * bary[l];
                out.kv[k][l] += wt * mu_inv * (g[k][0] * g[l][0] + g[k][1] * g[l][1]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn reference_vertex_blocks_match_classical_values() {
        let lb = local_element_matrices(&REF, &[1.0; 7], &[1.0; 7]).unwrap();
        // classical P1 stiffness of the reference triangle
        let kv = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        // P1 mass = area/12 * (ones + eye)
        for k in 0..3 {
            for l in 0..3 {
                assert!((lb.kv[k][l] - kv[k][l]).abs() < 1e-14);
                let want = if k == l { 1.0 / 12.0 } else { 1.0 / 24.0 };
                assert!((lb.mv[k][l] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn curl_curl_is_rank_one_scaled_by_area() {
        // C = s s^T |T| with s the constant curls
        let lb = local_element_matrices(&REF, &[1.0; 7], &[1.0; 7]).unwrap();
        // local edges (0,1),(1,2),(2,0) on the reference triangle all have curl 2
        for e in 0..3 {
            for f in 0..3 {
                assert!((lb.c[e][f] - 2.0 * 2.0 * 0.5).abs() < 1e-13, "c[{e}][{f}]");
            }
        }
    }

    #[test]
    fn scaling_eps_scales_only_eps_blocks() {
        let a = local_element_matrices(&REF, &[1.0; 7], &[1.0; 7]).unwrap();
        let b = local_element_matrices(&REF, &[2.0; 7], &[1.0; 7]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((b.me[i][j] - 2.0 * a.me[i][j]).abs() < 1e-14);
                assert!((b.mv[i][j] - 2.0 * a.mv[i][j]).abs() < 1e-14);
                assert!((b.d[i][j] - 2.0 * a.d[i][j]).abs() < 1e-14);
                assert_eq!(b.c[i][j], a.c[i][j]);
                assert_eq!(b.kv[i][j], a.kv[i][j]);
                assert_eq!(b.g[i][j], a.g[i][j]);
                assert_eq!(b.gdiv[i][j], a.gdiv[i][j]);
                assert_eq!(b.mmu[i][j], a.mmu[i][j]);
            }
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let coords = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(local_element_matrices(&coords, &[1.0; 7], &[1.0; 7]).is_err());
    }
}
