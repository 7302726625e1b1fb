//! Conforming triangle meshes of the cross-section with region and boundary
//! tags.
//!
//! A mesh is immutable after construction: [`Mesh::new`] validates orientation
//! and boundary consistency and derives the global edge table. Edges are
//! enumerated in lexicographic `(min node, max node)` order and oriented from
//! the lower to the higher node index, so assembly is deterministic regardless
//! of triangle ordering.
//!
//! Thin PEC strips should be modelled as crack meshes: duplicate the nodes
//! along the slit and tag both sides in `boundary_edges`. The field is
//! genuinely discontinuous across a PEC strip, and duplication makes the
//! elimination purely topological. Tagging a shared (non-duplicated) interior
//! edge is accepted and eliminates its dofs, but does not decouple the two
//! sides.
//!
//! # File format
//!
//! Line-oriented ASCII, sections in this order:
//!
//! ```text
//! $nodes
//! <N>
//! <id> <x> <y>
//! $triangles
//! <M>
//! <id> <v1> <v2> <v3> <region_tag>
//! $boundary_edges
//! <K>
//! <id> <v1> <v2> <tag>
//! $end
//! ```
//!
//! Node ids must be `0..N-1` in order; triangles are counterclockwise.
//! Coordinates are serialized with shortest round-trip formatting, so
//! `parse(serialize(m)) == m` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

pub const PEC_TAG: &str = "pec";

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    /// Node indices, counterclockwise.
    pub v: [usize; 3],
    pub region: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Global edges `(min, max)`, sorted lexicographically.
    edges: Vec<[usize; 2]>,
    /// Per triangle: the global edge index and incidence sign of the local
    /// edges `(v0,v1), (v1,v2), (v2,v0)`. The sign is +1 when the local
    /// direction runs from the lower to the higher node index.
    tri_edges: Vec<[(usize, f64); 3]>,
    /// Number of incident triangles per global edge (1 = geometric boundary).
    edge_tri_count: Vec<u8>,
}

impl Mesh {
    /// Validate raw data and derive the edge table.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<Triangle>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Mesh> {
        for (t, tri) in triangles.iter().enumerate() {
            for &vi in &tri.v {
                if vi >= nodes.len() {
                    return Err(Error::MeshInvalid(format!(
                        "triangle {t} references node {vi}, but the mesh has {} nodes",
                        nodes.len()
                    )));
                }
            }
            let a = signed_area(&nodes, tri.v);
            if !(a > 0.0) {
                return Err(Error::MeshInvalid(format!(
                    "triangle {t} has non-positive area {a:.3e} (nodes {:?})",
                    tri.v
                )));
            }
        }
        let mut used = vec![false; nodes.len()];
        for tri in &triangles {
            for &vi in &tri.v {
                used[vi] = true;
            }
        }
        if let Some(orphan) = used.iter().position(|u| !u) {
            return Err(Error::MeshInvalid(format!(
                "node {orphan} is not referenced by any triangle"
            )));
        }

        // global edge table, lexicographic by (min, max)
        let mut key_to_idx: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri.v[k], tri.v[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let next = key_to_idx.len();
                key_to_idx.entry(key).or_insert(next);
            }
        }
        // BTreeMap insertion order is arbitrary; renumber in sorted key order
        let mut edges: Vec<[usize; 2]> = key_to_idx.keys().copied().collect();
        edges.sort_unstable();
        let index_of: BTreeMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        let mut edge_tri_count = vec![0u8; edges.len()];
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut loc = [(0usize, 0.0f64); 3];
            for k in 0..3 {
                let (a, b) = (tri.v[k], tri.v[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let idx = index_of[&key];
                loc[k] = (idx, if a < b { 1.0 } else { -1.0 });
                edge_tri_count[idx] = edge_tri_count[idx].saturating_add(1);
            }
            tri_edges.push(loc);
        }
        if let Some(bad) = edge_tri_count.iter().position(|&c| c > 2) {
            return Err(Error::MeshInvalid(format!(
                "edge {:?} is shared by more than two triangles",
                edges[bad]
            )));
        }

        for (k, be) in boundary_edges.iter().enumerate() {
            let (a, b) = (be.v[0], be.v[1]);
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::MeshInvalid(format!(
                    "boundary edge {k} references a node out of range"
                )));
            }
            if !index_of.contains_key(&[a.min(b), a.max(b)]) {
                return Err(Error::MeshInvalid(format!(
                    "boundary edge {k} ({a}, {b}) does not match any triangle edge"
                )));
            }
        }

        Ok(Mesh {
            nodes,
            triangles,
            boundary_edges,
            edges,
            tri_edges,
            edge_tri_count,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edges, lexicographically sorted, oriented low-to-high.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Edge table row of a triangle: `(global edge, incidence sign)` for the
    /// local edges `(v0,v1), (v1,v2), (v2,v0)`.
    pub fn tri_edges(&self, t: usize) -> [(usize, f64); 3] {
        self.tri_edges[t]
    }

    /// Number of triangles incident to a global edge.
    pub fn edge_triangle_count(&self, e: usize) -> usize {
        self.edge_tri_count[e] as usize
    }

    /// Global index of an edge given any orientation of its node pair.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&[a.min(b), a.max(b)]).ok()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let v = self.triangles[t].v;
        [self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * signed_area(&self.nodes, self.triangles[t].v)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Serialize to the mesh file format. Deterministic; coordinates use
    /// shortest round-trip formatting.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "$nodes");
        let _ = writeln!(s, "{}", self.nodes.len());
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{} {} {}", i, p[0], p[1]);
        }
        let _ = writeln!(s, "$triangles");
        let _ = writeln!(s, "{}", self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(s, "{} {} {} {} {}", i, t.v[0], t.v[1], t.v[2], t.region);
        }
        let _ = writeln!(s, "$boundary_edges");
        let _ = writeln!(s, "{}", self.boundary_edges.len());
        for (i, b) in self.boundary_edges.iter().enumerate() {
            let _ = writeln!(s, "{} {} {} {}", i, b.v[0], b.v[1], b.tag);
        }
        let _ = writeln!(s, "$end");
        s
    }
}

fn signed_area(nodes: &[[f64; 2]], v: [usize; 3]) -> f64 {
    let [a, b, c] = [nodes[v[0]], nodes[v[1]], nodes[v[2]]];
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

type MeshLines<'a> = std::iter::Peekable<std::vec::IntoIter<(usize, &'a str)>>;

fn expect_header(lines: &mut MeshLines, want: &str) -> Result<usize> {
    match lines.next() {
        Some((ln, l)) if l == want => Ok(ln),
        Some((ln, l)) => Err(Error::Format {
            line: ln,
            msg: format!("expected section header '{want}', found '{l}'"),
        }),
        None => Err(Error::Format {
            line: 0,
            msg: format!("unexpected end of file, expected '{want}'"),
        }),
    }
}

fn count_line(lines: &mut MeshLines, what: &str) -> Result<(usize, usize)> {
    let (ln, l) = lines.next().ok_or(Error::Format {
        line: 0,
        msg: format!("unexpected end of file, expected {what} count"),
    })?;
    let n = l.parse::<usize>().map_err(|_| Error::Format {
        line: ln,
        msg: format!("expected {what} count, found '{l}'"),
    })?;
    Ok((ln, n))
}

/// Parse a mesh document. Errors carry the 1-based line number.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines: MeshLines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect::<Vec<_>>()
        .into_iter()
        .peekable();

    expect_header(&mut lines, "$nodes")?;
    let (_, n_nodes) = count_line(&mut lines, "node")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for want_id in 0..n_nodes {
        let (ln, l) = lines.next().ok_or(Error::Format {
            line: 0,
            msg: "unexpected end of file in $nodes".into(),
        })?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(Error::Format {
                line: ln,
                msg: format!("expected '<id> <x> <y>', found '{l}'"),
            });
        }
        let id: usize = tok[0].parse().map_err(|_| Error::Format {
            line: ln,
            msg: format!("bad node id '{}'", tok[0]),
        })?;
        if id != want_id {
            return Err(Error::Format {
                line: ln,
                msg: format!("node ids must be consecutive from 0; expected {want_id}, found {id}"),
            });
        }
        let x: f64 = tok[1].parse().map_err(|_| Error::Format {
            line: ln,
            msg: format!("bad x coordinate '{}'", tok[1]),
        })?;
        let y: f64 = tok[2].parse().map_err(|_| Error::Format {
            line: ln,
            msg: format!("bad y coordinate '{}'", tok[2]),
        })?;
        nodes.push([x, y]);
    }

    expect_header(&mut lines, "$triangles")?;
    let (_, n_tris) = count_line(&mut lines, "triangle")?;
    let mut triangles = Vec::with_capacity(n_tris);
    for want_id in 0..n_tris {
        let (ln, l) = lines.next().ok_or(Error::Format {
            line: 0,
            msg: "unexpected end of file in $triangles".into(),
        })?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 5 {
            return Err(Error::Format {
                line: ln,
                msg: format!("expected '<id> <v1> <v2> <v3> <region_tag>', found '{l}'"),
            });
        }
        let id: usize = tok[0].parse().map_err(|_| Error::Format {
            line: ln,
            msg: format!("bad triangle id '{}'", tok[0]),
        })?;
        if id != want_id {
            return Err(Error::Format {
                line: ln,
                msg: format!(
                    "triangle ids must be consecutive from 0; expected {want_id}, found {id}"
                ),
            });
        }
        let mut v = [0usize; 3];
        for k in 0..3 {
            v[k] = tok[1 + k].parse().map_err(|_| Error::Format {
                line: ln,
                msg: format!("bad node index '{}'", tok[1 + k]),
            })?;
            if v[k] >= nodes.len() {
                return Err(Error::Format {
                    line: ln,
                    msg: format!(
                        "dangling node index {} (mesh has {} nodes)",
                        v[k],
                        nodes.len()
                    ),
                });
            }
        }
        let a = signed_area(&nodes, v);
        if !(a > 0.0) {
            return Err(Error::Format {
                line: ln,
                msg: format!(
                    "triangle {id} has non-positive area {a:.3e}; nodes must be counterclockwise"
                ),
            });
        }
        triangles.push(Triangle {
            v,
            region: tok[4].to_string(),
        });
    }

    // edge keys for boundary matching with line-number context
    let mut edge_keys = std::collections::BTreeSet::new();
    for tri in &triangles {
        for k in 0..3 {
            let (a, b) = (tri.v[k], tri.v[(k + 1) % 3]);
            edge_keys.insert([a.min(b), a.max(b)]);
        }
    }

    expect_header(&mut lines, "$boundary_edges")?;
    let (_, n_bnd) = count_line(&mut lines, "boundary edge")?;
    let mut boundary_edges = Vec::with_capacity(n_bnd);
    for want_id in 0..n_bnd {
        let (ln, l) = lines.next().ok_or(Error::Format {
            line: 0,
            msg: "unexpected end of file in $boundary_edges".into(),
        })?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 4 {
            return Err(Error::Format {
                line: ln,
                msg: format!("expected '<id> <v1> <v2> <tag>', found '{l}'"),
            });
        }
        let id: usize = tok[0].parse().map_err(|_| Error::Format {
            line: ln,
            msg: format!("bad boundary edge id '{}'", tok[0]),
        })?;
        if id != want_id {
            return Err(Error::Format {
                line: ln,
                msg: format!(
                    "boundary edge ids must be consecutive from 0; expected {want_id}, found {id}"
                ),
            });
        }
        let a: usize = tok[1].parse().map_err(|_| Error::Format {
            line: ln,
            msg: format!("bad node index '{}'", tok[1]),
        })?;
        let b: usize = tok[2].parse().map_err(|_| Error::Format {
            line: ln,
            msg: format!("bad node index '{}'", tok[2]),
        })?;
        if a >= nodes.len() || b >= nodes.len() {
            return Err(Error::Format {
                line: ln,
                msg: format!("dangling node index in boundary edge ({a}, {b})"),
            });
        }
        if !edge_keys.contains(&[a.min(b), a.max(b)]) {
            return Err(Error::Format {
                line: ln,
                msg: format!("boundary edge {want_id} ({a}, {b}) does not match any triangle edge"),
            });
        }
        boundary_edges.push(BoundaryEdge {
            v: [a, b],
            tag: tok[3].to_string(),
        });
    }
    expect_header(&mut lines, "$end")?;

    Mesh::new(nodes, triangles, boundary_edges)
}

/// Structured triangulation of the rectangle `[0,a] x [0,b]`.
///
/// `(nx+1)(ny+1)` nodes, `2 nx ny` triangles. Cell diagonals alternate in a
/// checkerboard so the mesh keeps both reflection symmetries of the
/// rectangle. All outer edges are tagged `pec`; the single region tag is `0`.
pub fn generate_rect_mesh(a: f64, b: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rectangle dimensions must be positive, got a={a}, b={b}"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(
            "cell counts nx, ny must be at least 1".into(),
        ));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([a * i as f64 / nx as f64, b * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10) = (id(i, j), id(i + 1, j));
            let (v01, v11) = (id(i, j + 1), id(i + 1, j + 1));
            if (i + j) % 2 == 0 {
                // diagonal v00 -- v11
                triangles.push(Triangle {
                    v: [v00, v10, v11],
                    region: "0".into(),
                });
                triangles.push(Triangle {
                    v: [v00, v11, v01],
                    region: "0".into(),
                });
            } else {
                // diagonal v10 -- v01
                triangles.push(Triangle {
                    v: [v00, v10, v01],
                    region: "0".into(),
                });
                triangles.push(Triangle {
                    v: [v10, v11, v01],
                    region: "0".into(),
                });
            }
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge {
            v: [id(i, 0), id(i + 1, 0)],
            tag: PEC_TAG.into(),
        });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge {
            v: [id(nx, j), id(nx, j + 1)],
            tag: PEC_TAG.into(),
        });
    }
    for i in (0..nx).rev() {
        boundary_edges.push(BoundaryEdge {
            v: [id(i + 1, ny), id(i, ny)],
            tag: PEC_TAG.into(),
        });
    }
    for j in (0..ny).rev() {
        boundary_edges.push(BoundaryEdge {
            v: [id(0, j + 1), id(0, j)],
            tag: PEC_TAG.into(),
        });
    }
    Mesh::new(nodes, triangles, boundary_edges)
}

/// Red refinement: each triangle splits into four via edge midpoints.
///
/// Region and boundary tags are inherited; the node count of the result is
/// `old nodes + old edges` (one new node per parent edge).
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    let n0 = mesh.n_nodes();
    let mut nodes = mesh.nodes.clone();
    nodes.reserve(mesh.n_edges());
    for e in mesh.edges() {
        let (p, q) = (mesh.nodes[e[0]], mesh.nodes[e[1]]);
        nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
    }
    let mid = |mesh: &Mesh, a: usize, b: usize| n0 + mesh.edge_index(a, b).unwrap();

    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let tri = &mesh.triangles[t];
        let [a, b, c] = tri.v;
        let (mab, mbc, mca) = (mid(mesh, a, b), mid(mesh, b, c), mid(mesh, c, a));
        let r = &tri.region;
        triangles.push(Triangle {
            v: [a, mab, mca],
            region: r.clone(),
        });
        triangles.push(Triangle {
            v: [b, mbc, mab],
            region: r.clone(),
        });
        triangles.push(Triangle {
            v: [c, mca, mbc],
            region: r.clone(),
        });
        triangles.push(Triangle {
            v: [mab, mbc, mca],
            region: r.clone(),
        });
    }

    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for be in &mesh.boundary_edges {
        let [a, b] = be.v;
        let m = mid(mesh, a, b);
        boundary_edges.push(BoundaryEdge {
            v: [a, m],
            tag: be.tag.clone(),
        });
        boundary_edges.push(BoundaryEdge {
            v: [m, b],
            tag: be.tag.clone(),
        });
    }
    Mesh::new(nodes, triangles, boundary_edges)
}

/// Convenience: the smallest valid mesh, one reference triangle with all
/// edges tagged `pec`.
pub fn reference_triangle() -> Mesh {
    Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![Triangle {
            v: [0, 1, 2],
            region: "0".into(),
        }],
        vec![
            BoundaryEdge {
                v: [0, 1],
                tag: PEC_TAG.into(),
            },
            BoundaryEdge {
                v: [1, 2],
                tag: PEC_TAG.into(),
            },
            BoundaryEdge {
                v: [2, 0],
                tag: PEC_TAG.into(),
            },
        ],
    )
    .expect("reference triangle is valid")
}
