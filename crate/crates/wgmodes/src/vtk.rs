//! Legacy-VTK ASCII export of mode fields on the cross-section mesh.
//!
//! Per mode: the transverse field evaluated at triangle centroids as
//! cell-data vectors (real and imaginary parts, z component zero) and the
//! scaled longitudinal field as point-data scalars. Loads in standard
//! viewers; one file per mode set.

use std::fmt::Write as _;
use std::path::Path;

use crate::fem::{whitney_at, DofMap};
use crate::mesh::Mesh;
use crate::modes::ModeSet;
use crate::Result;

/// Evaluate the transverse field of mode `m` at each triangle centroid.
fn centroid_fields(mesh: &Mesh, dofmap: &DofMap, set: &ModeSet, m: usize) -> Vec<[f64; 4]> {
    let mode = &set.modes[m];
    let centroid_bary = [1.0 / 3.0; 3];
    let mut out = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let coords = mesh.triangle_coords(t);
        let w = whitney_at(&coords, centroid_bary);
        let mut re = [0.0f64; 2];
        let mut im = [0.0f64; 2];
        for (k, &(edge, sign)) in mesh.tri_edges(t).iter().enumerate() {
            if let Some(dof) = dofmap.edge_dof[edge] {
                let c = mode.u[dof];
                re[0] += sign * c.re * w[k][0];
                re[1] += sign * c.re * w[k][1];
                im[0] += sign * c.im * w[k][0];
                im[1] += sign * c.im * w[k][1];
            }
        }
        out.push([re[0], re[1], im[0], im[1]]);
    }
    out
}

/// Render the mode set as a legacy VTK unstructured grid document.
pub fn render_fields(mesh: &Mesh, dofmap: &DofMap, set: &ModeSet) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "wgmodes cross-section mode fields");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let nt = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t.v[0], t.v[1], t.v[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "5");
    }

    if set.modes.is_empty() {
        return s;
    }

    let _ = writeln!(s, "CELL_DATA {nt}");
    for m in 0..set.modes.len() {
        let fields = centroid_fields(mesh, dofmap, set, m);
        for (suffix, off) in [("re", 0usize), ("im", 2usize)] {
            let _ = writeln!(s, "VECTORS mode{m:02}_E_{suffix} double");
            for f in &fields {
                let _ = writeln!(s, "{} {} 0", f[off], f[off + 1]);
            }
        }
    }

    let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes());
    for (m, mode) in set.modes.iter().enumerate() {
        for (suffix, pick) in [
            ("re", (|c: num_complex::Complex64| c.re) as fn(_) -> f64),
            ("im", (|c: num_complex::Complex64| c.im) as fn(_) -> f64),
        ] {
            let _ = writeln!(s, "SCALARS mode{m:02}_E3_{suffix} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for node in 0..mesh.n_nodes() {
                let v = dofmap.vertex_dof[node].map_or(0.0, |d| pick(mode.p[d]));
                let _ = writeln!(s, "{v}");
            }
        }
    }
    s
}

/// Write the mode fields to a file.
pub fn export_fields(mesh: &Mesh, dofmap: &DofMap, set: &ModeSet, path: &Path) -> Result<()> {
    std::fs::write(path, render_fields(mesh, dofmap, set))?;
    Ok(())
}
