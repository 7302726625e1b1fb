//! Global assembly of the sparse bilinear-form blocks over free dofs.

use crate::materials::MaterialMap;
use crate::mesh::Mesh;
use crate::quadrature::tri7;
use crate::sparse::Csr;
use crate::Result;

use super::dofmap::DofMap;
use super::local::local_element_matrices;

/// The assembled sparse blocks, all over free dofs (edges first convention).
///
/// Symmetric blocks (`c`, `me`, `mmu`, `mv`, `kv`) are exactly symmetric:
/// accumulation is followed by an explicit symmetrization. `me`, `mmu`, `mv`
/// are positive definite, `c` and `kv` positive semidefinite, and everything
/// is real for the real materials this crate supports.
#[derive(Debug, Clone)]
pub struct PencilBlocks {
    pub n_edge_dofs: usize,
    pub n_vertex_dofs: usize,
    /// curl-curl edge block `<mu^-1 curl phi_j, curl phi_i>`
    pub c: Csr<f64>,
    /// eps-weighted edge mass `<eps phi_j, phi_i>`
    pub me: Csr<f64>,
    /// mu^-1-weighted edge mass `<mu^-1 phi_j, phi_i>`
    pub mmu: Csr<f64>,
    /// gradient coupling `G[i,k] = <mu^-1 grad psi_k, phi_i>` (edge x vertex)
    pub g: Csr<f64>,
    /// divergence coupling `D[k,j] = -<eps phi_j, grad psi_k>` (vertex x edge)
    pub d: Csr<f64>,
    /// `Gdiv[k,j] = <mu^-1 phi_j, grad psi_k>` (vertex x edge)
    pub gdiv: Csr<f64>,
    /// eps-weighted vertex mass `<eps psi_l, psi_k>`
    pub mv: Csr<f64>,
    /// mu^-1-weighted vertex stiffness `<mu^-1 grad psi_l, grad psi_k>`
    pub kv: Csr<f64>,
}

impl PencilBlocks {
    /// The curl form `C - omega^2 Me`, the matrix behind the modal
    /// orthogonality pairing and the Dirichlet-to-Neumann boundary term.
    pub fn curl_form(&self, omega: f64) -> Csr<f64> {
        Csr::combine(&[(1.0, &self.c), (-omega * omega, &self.me)])
    }
}

/// Assemble all eight blocks. Fails if a mesh region has no material entry.
pub fn assemble_blocks(
    mesh: &Mesh,
    dofmap: &DofMap,
    materials: &MaterialMap,
) -> Result<PencilBlocks> {
    let ne = dofmap.n_edge_dofs();
    let nv = dofmap.n_vertex_dofs();
    let rule = tri7();

    let mut t_c = Vec::new();
    let mut t_me = Vec::new();
    let mut t_mmu = Vec::new();
    let mut t_g = Vec::new();
    let mut t_d = Vec::new();
    let mut t_gdiv = Vec::new();
    let mut t_mv = Vec::new();
    let mut t_kv = Vec::new();

    for t in 0..mesh.n_triangles() {
        let tri = &mesh.triangles[t];
        let mat = materials.region(&tri.region)?;
        let coords = mesh.triangle_coords(t);
        let mut eps_q = [0.0; 7];
        let mut mu_q = [0.0; 7];
        for (q, (bary, _)) in rule.iter().enumerate() {
            eps_q[q] = mat.epsilon.eval(tri.v, *bary)?;
            mu_q[q] = mat.mu.eval(tri.v, *bary)?;
        }
        let lb = local_element_matrices(&coords, &eps_q, &mu_q)?;

        // dof and sign lookup for the three local edges and vertices
        let te = mesh.tri_edges(t);
        let edofs: Vec<Option<(usize, f64)>> = (0..3)
            .map(|k| dofmap.edge_dof[te[k].0].map(|d| (d, te[k].1)))
            .collect();
        let vdofs: Vec<Option<usize>> = (0..3).map(|k| dofmap.vertex_dof[tri.v[k]]).collect();

        for i in 0..3 {
            let Some((gi, si)) = edofs[i] else { continue };
            for j in 0..3 {
                if let Some((gj, sj)) = edofs[j] {
                    t_c.push((gi, gj, si * sj * lb.c[i][j]));
                    t_me.push((gi, gj, si * sj * lb.me[i][j]));
                    t_mmu.push((gi, gj, si * sj * lb.mmu[i][j]));
                }
            }
            for k in 0..3 {
                if let Some(gk) = vdofs[k] {
                    t_g.push((gi, gk, si * lb.g[i][k]));
                    t_d.push((gk, gi, si * lb.d[k][i]));
                    t_gdiv.push((gk, gi, si * lb.gdiv[k][i]));
                }
            }
        }
        for k in 0..3 {
            let Some(gk) = vdofs[k] else { continue };
            for l in 0..3 {
                if let Some(gl) = vdofs[l] {
                    t_mv.push((gk, gl, lb.mv[k][l]));
                    t_kv.push((gk, gl, lb.kv[k][l]));
                }
            }
        }
    }

    Ok(PencilBlocks {
        n_edge_dofs: ne,
        n_vertex_dofs: nv,
        c: Csr::from_triplets(ne, ne, &t_c).symmetrized(),
        me: Csr::from_triplets(ne, ne, &t_me).symmetrized(),
        mmu: Csr::from_triplets(ne, ne, &t_mmu).symmetrized(),
        g: Csr::from_triplets(ne, nv, &t_g),
        d: Csr::from_triplets(nv, ne, &t_d),
        gdiv: Csr::from_triplets(nv, ne, &t_gdiv),
        mv: Csr::from_triplets(nv, nv, &t_mv).symmetrized(),
        kv: Csr::from_triplets(nv, nv, &t_kv).symmetrized(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_dofmap;
    use crate::materials::MaterialMap;
    use crate::mesh::{generate_rect_mesh, reference_triangle, PEC_TAG};
    use std::collections::BTreeSet;

    fn pec() -> BTreeSet<String> {
        BTreeSet::from([PEC_TAG.to_string()])
    }

    #[test]
    fn fully_clamped_mesh_gives_empty_edge_blocks() {
        let mesh = reference_triangle();
        let dm = build_dofmap(&mesh, &pec()).unwrap();
        let blocks = assemble_blocks(&mesh, &dm, &MaterialMap::uniform(1.0, 1.0)).unwrap();
        assert_eq!(blocks.c.nrows(), 0);
        assert_eq!(blocks.mv.nrows(), 0);
    }

    #[test]
    fn missing_region_is_reported() {
        let mesh = generate_rect_mesh(1.0, 1.0, 2, 2).unwrap();
        let dm = build_dofmap(&mesh, &pec()).unwrap();
        let mut mats = MaterialMap::default();
        mats.insert_constant("some_other_region", 1.0, 1.0);
        let err = assemble_blocks(&mesh, &dm, &mats).unwrap_err();
        assert!(err.to_string().contains("'0'"), "{err}");
    }

    #[test]
    fn symmetric_blocks_are_exactly_symmetric() {
        let mesh = generate_rect_mesh(1.0, 0.5, 4, 2).unwrap();
        let dm = build_dofmap(&mesh, &pec()).unwrap();
        let b = assemble_blocks(&mesh, &dm, &MaterialMap::uniform(2.0, 1.5)).unwrap();
        for m in [&b.c, &b.me, &b.mmu, &b.mv, &b.kv] {
            for (r, c, v) in m.iter() {
                assert_eq!(v, m.get(c, r));
            }
        }
    }

    #[test]
    fn doubling_inverse_mu_scales_the_right_blocks() {
        let mesh = generate_rect_mesh(1.0, 0.5, 3, 2).unwrap();
        let dm = build_dofmap(&mesh, &pec()).unwrap();
        let a = assemble_blocks(&mesh, &dm, &MaterialMap::uniform(1.0, 1.0)).unwrap();
        let b = assemble_blocks(&mesh, &dm, &MaterialMap::uniform(1.0, 0.5)).unwrap();
        let same = |x: &Csr<f64>, y: &Csr<f64>| x == y;
        let doubled = |x: &Csr<f64>, y: &Csr<f64>| {
            x.iter().zip(y.iter()).all(|((r1, c1, v1), (r2, c2, v2))| {
                (r1, c1) == (r2, c2) && (2.0 * v1 - v2).abs() <= 1e-14 * v1.abs().max(1.0)
            })
        };
        assert!(doubled(&a.c, &b.c));
        assert!(doubled(&a.mmu, &b.mmu));
        assert!(doubled(&a.g, &b.g));
        assert!(doubled(&a.gdiv, &b.gdiv));
        assert!(doubled(&a.kv, &b.kv));
        assert!(same(&a.me, &b.me));
        assert!(same(&a.mv, &b.mv));
        assert!(same(&a.d, &b.d));
    }

    #[test]
    fn gdiv_is_the_transpose_of_g_and_d_is_minus_gdiv_for_matching_materials() {
        // with eps = mu^-1 the D and Gdiv integrands coincide up to sign
        let mesh = generate_rect_mesh(1.0, 0.5, 3, 2).unwrap();
        let dm = build_dofmap(&mesh, &pec()).unwrap();
        let b = assemble_blocks(&mesh, &dm, &MaterialMap::uniform(2.0, 0.5)).unwrap();
        let gt = b.g.transpose();
        for (r, c, v) in b.gdiv.iter() {
            assert!((v - gt.get(r, c)).abs() < 1e-14);
            assert!((b.d.get(r, c) + v).abs() < 1e-14);
        }
    }
}
