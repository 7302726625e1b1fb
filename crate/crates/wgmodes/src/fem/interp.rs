//! Edge interpolation of vector fields into the free-edge dof space.

use crate::fem::dofmap::DofMap;
use crate::mesh::Mesh;
use crate::quadrature::gauss3_unit;

/// Interpolate a vector field into lowest-order edge coefficients.
///
/// The coefficient on a free edge is its tangential line integral,
/// `int_e field . tau ds`, with the edge oriented from the lower to the
/// higher node index, evaluated with 3-point Gauss. PEC edges carry no dof,
/// which forces the zero tangential trace. The result is indexed by edge dof.
pub fn interpolate_hcurl<F>(mesh: &Mesh, dofmap: &DofMap, field: F) -> Vec<f64>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let rule = gauss3_unit();
    let mut coeffs = vec![0.0; dofmap.n_edge_dofs()];
    for (dof, &e) in dofmap.free_edges.iter().enumerate() {
        let [a, b] = mesh.edges()[e];
        let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
        let dir = [pb[0] - pa[0], pb[1] - pa[1]]; // tangent times length
        let mut acc = 0.0;
        for &(t, w) in &rule {
            let p = [pa[0] + t * dir[0], pa[1] + t * dir[1]];
            let f = field(p);
            acc += w * (f[0] * dir[0] + f[1] * dir[1]);
        }
        coeffs[dof] = acc;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_dofmap;
    use crate::mesh::{generate_rect_mesh, Mesh, Triangle};
    use std::collections::BTreeSet;

    #[test]
    fn constant_field_on_a_unit_edge() {
        // two triangles so the diagonal edge (0,0)-(1,0) wait: use a mesh where
        // the edge from (0,0) to (1,0) is interior and therefore free.
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0]];
        let triangles = vec![
            Triangle {
                v: [0, 1, 2],
                region: "0".into(),
            },
            Triangle {
                v: [1, 0, 3],
                region: "0".into(),
            },
        ];
        let bnd = [[0, 2], [2, 1], [1, 3], [3, 0]]
            .iter()
            .map(|&[a, b]| crate::mesh::BoundaryEdge {
                v: [a, b],
                tag: "pec".into(),
            })
            .collect();
        let mesh = Mesh::new(nodes, triangles, bnd).unwrap();
        let dm = build_dofmap(&mesh, &BTreeSet::from(["pec".to_string()])).unwrap();
        assert_eq!(dm.n_edge_dofs(), 1);
        let coeffs = interpolate_hcurl(&mesh, &dm, |_| [1.0, 0.0]);
        assert!((coeffs[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_field_has_zero_circulation() {
        // sum of signed edge coefficients of grad(xy) around each triangle is 0
        let mesh = generate_rect_mesh(1.3, 0.9, 3, 3).unwrap();
        // all edges free for this check: use a dofmap built on a copy where
        // boundary edges keep their dofs? Circulation only needs coefficients,
        // so compute them for every edge directly.
        let rule = crate::quadrature::gauss3_unit();
        let coeff_of_edge = |e: usize| {
            let [a, b] = mesh.edges()[e];
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            let dir = [pb[0] - pa[0], pb[1] - pa[1]];
            rule.iter()
                .map(|&(t, w)| {
                    let p = [pa[0] + t * dir[0], pa[1] + t * dir[1]];
                    let f = [p[1], p[0]]; // grad(xy)
                    w * (f[0] * dir[0] + f[1] * dir[1])
                })
                .sum::<f64>()
        };
        for t in 0..mesh.n_triangles() {
            let circ: f64 = mesh
                .tri_edges(t)
                .iter()
                .map(|&(e, s)| s * coeff_of_edge(e))
                .sum();
            assert!(circ.abs() < 1e-14, "triangle {t} circulation {circ}");
        }
    }
}
