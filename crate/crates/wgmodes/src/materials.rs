//! Piecewise material data: relative permittivity and permeability per
//! region, either constants or P1-interpolated nodal fields.
//!
//! Material file format, one region per line:
//!
//! ```text
//! <region_tag> <epsilon> <mu>
//! <region_tag> field <eps_file> <mu_file>
//! ```
//!
//! Nodal value files hold one `<node_id> <value>` pair per line. Graded
//! coefficients are evaluated at quadrature points by P1 interpolation of the
//! nodal values; discontinuities are only allowed across region boundaries,
//! which the mesh resolves by construction.

use std::collections::BTreeMap;
use std::path::Path;

use crate::mesh::Mesh;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum MaterialValue {
    Constant(f64),
    /// One value per mesh node; NaN marks nodes absent from the field file.
    PerNode(Vec<f64>),
}

impl MaterialValue {
    /// Evaluate at a barycentric point of a triangle.
    pub fn eval(&self, tri_nodes: [usize; 3], bary: [f64; 3]) -> Result<f64> {
        match self {
            MaterialValue::Constant(v) => Ok(*v),
            MaterialValue::PerNode(vals) => {
                let mut acc = 0.0;
                for k in 0..3 {
                    let v = vals[tri_nodes[k]];
                    if v.is_nan() {
                        return Err(Error::Material(format!(
                            "node {} has no value in the field file",
                            tri_nodes[k]
                        )));
                    }
                    acc += bary[k] * v;
                }
                Ok(acc)
            }
        }
    }

    fn max(&self) -> f64 {
        match self {
            MaterialValue::Constant(v) => *v,
            MaterialValue::PerNode(vals) => vals
                .iter()
                .copied()
                .filter(|v| !v.is_nan())
                .fold(0.0, f64::max),
        }
    }

    fn check_positive(&self, what: &str, region: &str) -> Result<()> {
        let ok = match self {
            MaterialValue::Constant(v) => v.is_finite() && *v > 0.0,
            MaterialValue::PerNode(vals) => vals
                .iter()
                .all(|v| v.is_nan() || (v.is_finite() && *v > 0.0)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Material(format!(
                "{what} for region '{region}' must be finite and uniformly positive"
            )))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegionMaterial {
    pub epsilon: MaterialValue,
    pub mu: MaterialValue,
}

/// Map from region tag to material data.
#[derive(Debug, Clone, Default)]
pub struct MaterialMap {
    regions: BTreeMap<String, RegionMaterial>,
    /// Fallback applied to regions without an explicit entry (vacuum-style
    /// uniform materials in tests and generated geometries).
    wildcard: Option<RegionMaterial>,
}

impl MaterialMap {
    /// Uniform constants for every region.
    pub fn uniform(epsilon: f64, mu: f64) -> MaterialMap {
        MaterialMap {
            regions: BTreeMap::new(),
            wildcard: Some(RegionMaterial {
                epsilon: MaterialValue::Constant(epsilon),
                mu: MaterialValue::Constant(mu),
            }),
        }
    }

    pub fn insert_constant(&mut self, region: &str, epsilon: f64, mu: f64) {
        self.insert_region(
            region,
            MaterialValue::Constant(epsilon),
            MaterialValue::Constant(mu),
        );
    }

    pub fn insert_region(&mut self, region: &str, epsilon: MaterialValue, mu: MaterialValue) {
        self.regions
            .insert(region.to_string(), RegionMaterial { epsilon, mu });
    }

    pub fn region(&self, tag: &str) -> Result<&RegionMaterial> {
        self.regions
            .get(tag)
            .or(self.wildcard.as_ref())
            .ok_or_else(|| {
                Error::Material(format!(
                    "region tag '{tag}' is missing from the material map"
                ))
            })
    }

    /// Constant `(epsilon, mu)` of a region, when both are constants.
    pub fn constants_for(&self, tag: &str) -> Option<(f64, f64)> {
        let r = self.regions.get(tag).or(self.wildcard.as_ref())?;
        match (&r.epsilon, &r.mu) {
            (MaterialValue::Constant(e), MaterialValue::Constant(m)) => Some((*e, *m)),
            _ => None,
        }
    }

    /// Largest epsilon * mu over all entries; used for the default eigensolver
    /// shift `omega^2 * max(eps mu)`.
    pub fn max_eps_mu(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in self.regions.values().chain(self.wildcard.iter()) {
            m = m.max(r.epsilon.max() * r.mu.max());
        }
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    fn validate(&self) -> Result<()> {
        for (tag, r) in &self.regions {
            r.epsilon.check_positive("epsilon", tag)?;
            r.mu.check_positive("mu", tag)?;
        }
        if let Some(r) = &self.wildcard {
            r.epsilon.check_positive("epsilon", "*")?;
            r.mu.check_positive("mu", "*")?;
        }
        Ok(())
    }
}

/// Parse a material document. `base_dir` resolves nodal field files; the mesh
/// fixes the node count.
pub fn parse_materials(text: &str, base_dir: &Path, mesh: &Mesh) -> Result<MaterialMap> {
    let mut map = MaterialMap::default();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ln = ln + 1;
        let tok: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::Format { line: ln, msg };
        if tok.len() == 3 {
            let eps: f64 = tok[1]
                .parse()
                .map_err(|_| bad(format!("bad epsilon '{}'", tok[1])))?;
            let mu: f64 = tok[2]
                .parse()
                .map_err(|_| bad(format!("bad mu '{}'", tok[2])))?;
            map.regions.insert(
                tok[0].to_string(),
                RegionMaterial {
                    epsilon: MaterialValue::Constant(eps),
                    mu: MaterialValue::Constant(mu),
                },
            );
        } else if tok.len() == 4 && tok[1] == "field" {
            let eps = load_node_field(&base_dir.join(tok[2]), mesh)?;
            let mu = load_node_field(&base_dir.join(tok[3]), mesh)?;
            map.regions.insert(
                tok[0].to_string(),
                RegionMaterial {
                    epsilon: MaterialValue::PerNode(eps),
                    mu: MaterialValue::PerNode(mu),
                },
            );
        } else {
            return Err(bad(format!(
                "expected '<region> <eps> <mu>' or '<region> field <eps_file> <mu_file>', found '{line}'"
            )));
        }
    }
    map.validate()?;
    Ok(map)
}

fn load_node_field(path: &Path, mesh: &Mesh) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Material(format!("cannot read field file {}: {e}", path.display())))?;
    let mut vals = vec![f64::NAN; mesh.n_nodes()];
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::Format { line: ln + 1, msg };
        if tok.len() != 2 {
            return Err(bad(format!("expected '<node_id> <value>', found '{line}'")));
        }
        let id: usize = tok[0]
            .parse()
            .map_err(|_| bad(format!("bad node id '{}'", tok[0])))?;
        if id >= mesh.n_nodes() {
            return Err(bad(format!(
                "node id {id} out of range (mesh has {} nodes)",
                mesh.n_nodes()
            )));
        }
        let v: f64 = tok[1]
            .parse()
            .map_err(|_| bad(format!("bad value '{}'", tok[1])))?;
        vals[id] = v;
    }
    Ok(vals)
}
