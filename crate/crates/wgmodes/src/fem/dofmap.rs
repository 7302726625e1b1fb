//! Degree-of-freedom management for the mixed edge/vertex space.
//!
//! PEC elimination realizes the essential boundary conditions: the tangential
//! trace vanishes on PEC edges (the edge dof is dropped) and the longitudinal
//! field vanishes at every vertex of a PEC edge (the vertex dof is dropped).
//! Dof indices are contiguous with edges first.

use std::collections::BTreeSet;

use crate::mesh::Mesh;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DofMap {
    /// Global edge indices of the free edge dofs, ascending.
    pub free_edges: Vec<usize>,
    /// Node indices of the free vertex dofs, ascending.
    pub free_vertices: Vec<usize>,
    /// Global edge -> edge dof (None when eliminated).
    pub edge_dof: Vec<Option<usize>>,
    /// Node -> vertex dof (None when eliminated).
    pub vertex_dof: Vec<Option<usize>>,
}

impl DofMap {
    pub fn n_edge_dofs(&self) -> usize {
        self.free_edges.len()
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.free_vertices.len()
    }

    /// Total dof count, edges first.
    pub fn n_dofs(&self) -> usize {
        self.free_edges.len() + self.free_vertices.len()
    }
}

/// Eliminate PEC edge and vertex dofs.
///
/// Every geometric boundary edge (an edge with exactly one incident triangle)
/// must carry a tag from `pec_tags`: the cross-section has to be enclosed in
/// a perfect conductor for the modal problem to be well posed.
pub fn build_dofmap(mesh: &Mesh, pec_tags: &BTreeSet<String>) -> Result<DofMap> {
    if pec_tags.is_empty() {
        return Err(Error::Dof(
            "the PEC tag set must not be empty; the outer boundary must be a perfect conductor"
                .into(),
        ));
    }

    let mut edge_is_pec = vec![false; mesh.n_edges()];
    for be in &mesh.boundary_edges {
        if pec_tags.contains(&be.tag) {
            let e = mesh
                .edge_index(be.v[0], be.v[1])
                .expect("boundary edges validated at mesh construction");
            edge_is_pec[e] = true;
        }
    }

    for e in 0..mesh.n_edges() {
        if mesh.edge_triangle_count(e) == 1 && !edge_is_pec[e] {
            let [a, b] = mesh.edges()[e];
            return Err(Error::Dof(format!(
                "outer boundary not fully covered by PEC tags: edge ({a}, {b}) has a single \
                 incident triangle but no PEC tag"
            )));
        }
    }

    let mut vertex_is_pec = vec![false; mesh.n_nodes()];
    for (e, &is_pec) in edge_is_pec.iter().enumerate() {
        if is_pec {
            let [a, b] = mesh.edges()[e];
            vertex_is_pec[a] = true;
            vertex_is_pec[b] = true;
        }
    }

    let mut edge_dof = vec![None; mesh.n_edges()];
    let mut free_edges = Vec::new();
    for (e, &is_pec) in edge_is_pec.iter().enumerate() {
        if !is_pec {
            edge_dof[e] = Some(free_edges.len());
            free_edges.push(e);
        }
    }
    let mut vertex_dof = vec![None; mesh.n_nodes()];
    let mut free_vertices = Vec::new();
    for (v, &is_pec) in vertex_is_pec.iter().enumerate() {
        if !is_pec {
            vertex_dof[v] = Some(free_vertices.len());
            free_vertices.push(v);
        }
    }

    Ok(DofMap {
        free_edges,
        free_vertices,
        edge_dof,
        vertex_dof,
    })
}
