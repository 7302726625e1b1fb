//! The modal Dirichlet-to-Neumann matrix on the free-edge trace space.
//!
//! Given normalized modes `(beta_j, u_j)` of the cross-section and the
//! cluster partition of their `beta^2` values, the DtN matrix is
//!
//! ```text
//! N = sum over clusters K of  W_K diag(-i / beta_j) G_K^-1 W_K^H
//! ```
//!
//! where the columns of `W_K` are `w_j = (C - w^2 Me) u_j` and `G_K` is the
//! cluster Gram matrix under the modal pairing. Isolated modes are 1x1
//! clusters; their Gram entry `a(u_j, u_j) = +-1` carries the sign of the
//! mode's quadratic form, so `N u_j = -i beta_j^-1 w_j` holds for every
//! contributing mode by construction. Applying `N` to a trace yields the
//! weak boundary load an exterior-aware 3D solver assembles on the
//! cross-section, with the `-i/beta` factor of the two-step modal recipe;
//! a consumer whose convention keeps the boundary term on the left-hand side
//! of the variational equation negates the load (see the sign metadata).
//!
//! # `WGDTN1` file format
//!
//! Line-oriented ASCII. All floats are shortest round-trip decimal; complex
//! numbers are `re im` pairs on one line.
//!
//! ```text
//! WGDTN1
//! omega <f>
//! ne <n>
//! nmodes <N>
//! sign -i/beta
//! units c=1;lengths-dimensionless;z-positive-outgoing
//! fingerprint <16-hex-digit mesh hash>
//! betas
//! <re> <im>              (N lines)
//! classes
//! <c_0> ... <c_{N-1}>    (one line)
//! clusters
//! <id_0> ... <id_{N-1}>  (one line; modes with equal id share a cluster)
//! matrix
//! <re> <im>              (ne*ne lines, row major)
//! factors
//! w
//! <re> <im>              (ne*N lines, row major)
//! d
//! <re> <im>              (N lines, the -i/beta diagonal)
//! gram
//! <re> <im>              (N*N lines, row major, zero across clusters)
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::fem::PencilBlocks;
use crate::mesh::Mesh;
use crate::modes::{Classification, ModeCluster, ModeSet, ModeTols};
use crate::{Error, Result};

const MAGIC: &str = "WGDTN1";
const SIGN_CONVENTION: &str = "-i/beta";
const UNITS: &str = "c=1;lengths-dimensionless;z-positive-outgoing";

/// Dense modal DtN matrix with its provenance metadata and factored form.
#[derive(Debug, Clone)]
pub struct DtnMatrix {
    pub omega: f64,
    pub n_e: usize,
    /// Dense operator on the free-edge trace space.
    pub matrix: DMatrix<Complex64>,
    /// Branch-selected `beta` per contributing mode.
    pub betas: Vec<Complex64>,
    /// Classification string per contributing mode.
    pub classes: Vec<Classification>,
    /// Cluster id per contributing mode.
    pub cluster_ids: Vec<usize>,
    /// Columns `w_j = (C - w^2 Me) u_j`.
    pub w: DMatrix<Complex64>,
    /// Diagonal `-i / beta_j`.
    pub dvec: Vec<Complex64>,
    /// Block-diagonal Gram matrix (zero across clusters).
    pub gram: DMatrix<Complex64>,
    /// FNV-1a hash of the canonical mesh serialization.
    pub mesh_fingerprint: u64,
    pub sign_convention: String,
    pub units: String,
}

/// FNV-1a hash of the canonical mesh serialization.
pub fn mesh_fingerprint(mesh: &Mesh) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in mesh.serialize().bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Expansion coefficients of a trace in the modal basis.
///
/// Isolated modes project directly through the pairing; modes inside a
/// cluster require the small Gram solve. Degenerate clusters cannot be
/// projected and error out, listing their members.
pub fn expansion_coeffs(
    blocks: &PencilBlocks,
    omega: f64,
    set: &ModeSet,
    clusters: &[ModeCluster],
    trace: &[Complex64],
) -> Result<Vec<Complex64>> {
    if trace.len() != blocks.n_edge_dofs {
        return Err(Error::Dimension(format!(
            "trace length {} does not match {} edge dofs",
            trace.len(),
            blocks.n_edge_dofs
        )));
    }
    let cform = blocks.curl_form(omega);
    let applied = cform.matvec_c(trace);
    let mut coeffs = vec![Complex64::default(); set.modes.len()];
    for cluster in clusters {
        if cluster.degenerate {
            return Err(Error::DegenerateCluster(cluster.members.clone()));
        }
        // m_k = a(trace, u_k) = u_k^H (C - w^2 Me) trace
        let m = cluster.members.len();
        let mut rhs = nalgebra::DVector::<Complex64>::zeros(m);
        for (kk, &k) in cluster.members.iter().enumerate() {
            let mut acc = Complex64::default();
            for (uk, av) in set.modes[k].u.iter().zip(&applied) {
                acc += uk.conj() * av;
            }
            rhs[kk] = acc;
        }
        let sol = cluster
            .gram
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::DegenerateCluster(cluster.members.clone()))?;
        for (kk, &k) in cluster.members.iter().enumerate() {
            coeffs[k] = sol[kk];
        }
    }
    Ok(coeffs)
}

/// Assemble the DtN matrix from branch-selected, normalized modes.
pub fn build_dtn(
    blocks: &PencilBlocks,
    omega: f64,
    set: &ModeSet,
    clusters: &[ModeCluster],
    mesh_fingerprint: u64,
) -> Result<DtnMatrix> {
    let ne = blocks.n_edge_dofs;
    let nm = set.modes.len();
    for mode in &set.modes {
        if mode.beta == Complex64::default() {
            return Err(Error::InvalidArgument(
                "DtN assembly requires beta != 0 for every mode".into(),
            ));
        }
    }
    for cluster in clusters {
        if cluster.degenerate {
            return Err(Error::DegenerateCluster(cluster.members.clone()));
        }
    }

    let cform = blocks.curl_form(omega);
    let mut w = DMatrix::<Complex64>::zeros(ne, nm);
    for (j, mode) in set.modes.iter().enumerate() {
        let wj = cform.matvec_c(&mode.u);
        for i in 0..ne {
            w[(i, j)] = wj[i];
        }
    }
    let dvec: Vec<Complex64> = set.modes.iter().map(|m| -Complex64::i() / m.beta).collect();

    let mut matrix = DMatrix::<Complex64>::zeros(ne, ne);
    let mut gram = DMatrix::<Complex64>::zeros(nm, nm);
    let mut cluster_ids = vec![0usize; nm];
    for (cid, cluster) in clusters.iter().enumerate() {
        let m = cluster.members.len();
        for (kk, &k) in cluster.members.iter().enumerate() {
            cluster_ids[k] = cid;
            for (ll, &l) in cluster.members.iter().enumerate() {
                gram[(k, l)] = cluster.gram[(kk, ll)];
            }
        }
        // W_K diag(-i/beta) G_K^-1 W_K^H, built via the solved coefficients
        let mut wk = DMatrix::<Complex64>::zeros(ne, m);
        for (kk, &k) in cluster.members.iter().enumerate() {
            wk.set_column(kk, &w.column(k));
        }
        let ginv = cluster
            .gram
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateCluster(cluster.members.clone()))?;
        let mut dk = DMatrix::<Complex64>::zeros(m, m);
        for (kk, &k) in cluster.members.iter().enumerate() {
            dk[(kk, kk)] = dvec[k];
        }
        matrix += &wk * dk * ginv * wk.adjoint();
    }

    Ok(DtnMatrix {
        omega,
        n_e: ne,
        matrix,
        betas: set.modes.iter().map(|m| m.beta).collect(),
        classes: set
            .modes
            .iter()
            .map(|m| m.classification(ModeTols::default().real_tol))
            .collect(),
        cluster_ids,
        w,
        dvec,
        gram,
        mesh_fingerprint,
        sign_convention: SIGN_CONVENTION.to_string(),
        units: UNITS.to_string(),
    })
}

impl DtnMatrix {
    /// Matrix-vector product: the weak boundary load for a given trace.
    pub fn apply(&self, trace: &[Complex64]) -> Result<Vec<Complex64>> {
        if trace.len() != self.n_e {
            return Err(Error::Dimension(format!(
                "trace length {} does not match n_e = {}",
                trace.len(),
                self.n_e
            )));
        }
        let t = nalgebra::DVector::from_column_slice(trace);
        let out = &self.matrix * t;
        Ok(out.iter().copied().collect())
    }

    /// Largest relative asymmetry `|N - N^T|` — zero when every contributing
    /// mode vector is real up to a global phase, which build-time callers may
    /// assert for purely propagating/evanescent spectra.
    pub fn asymmetry(&self) -> f64 {
        let nrm = self.matrix.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if nrm == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.n_e {
            for j in (i + 1)..self.n_e {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        worst / nrm
    }

    /// Serialize in the `WGDTN1` format.
    pub fn to_wgdtn1(&self) -> String {
        let mut s = String::new();
        let nm = self.betas.len();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "omega {}", self.omega);
        let _ = writeln!(s, "ne {}", self.n_e);
        let _ = writeln!(s, "nmodes {nm}");
        let _ = writeln!(s, "sign {}", self.sign_convention);
        let _ = writeln!(s, "units {}", self.units);
        let _ = writeln!(s, "fingerprint {:016x}", self.mesh_fingerprint);
        let _ = writeln!(s, "betas");
        for b in &self.betas {
            let _ = writeln!(s, "{} {}", b.re, b.im);
        }
        let _ = writeln!(s, "classes");
        let classes: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "{}", classes.join(" "));
        let _ = writeln!(s, "clusters");
        let ids: Vec<String> = self.cluster_ids.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
        let _ = writeln!(s, "matrix");
        for i in 0..self.n_e {
            for j in 0..self.n_e {
                let v = self.matrix[(i, j)];
                let _ = writeln!(s, "{} {}", v.re, v.im);
            }
        }
        let _ = writeln!(s, "factors");
        let _ = writeln!(s, "w");
        for i in 0..self.n_e {
            for j in 0..nm {
                let v = self.w[(i, j)];
                let _ = writeln!(s, "{} {}", v.re, v.im);
            }
        }
        let _ = writeln!(s, "d");
        for v in &self.dvec {
            let _ = writeln!(s, "{} {}", v.re, v.im);
        }
        let _ = writeln!(s, "gram");
        for i in 0..nm {
            for j in 0..nm {
                let v = self.gram[(i, j)];
                let _ = writeln!(s, "{} {}", v.re, v.im);
            }
        }
        let _ = writeln!(s, "end");
        s
    }
}

/// Write the DtN matrix to a file.
pub fn export_dtn(dtn: &DtnMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, dtn.to_wgdtn1())?;
    Ok(())
}

/// Read a `WGDTN1` file. When a mesh is supplied its fingerprint must match.
pub fn import_dtn(path: &Path, mesh: Option<&Mesh>) -> Result<DtnMatrix> {
    let text = std::fs::read_to_string(path)?;
    let dtn = parse_wgdtn1(&text)?;
    if let Some(mesh) = mesh {
        let fp = mesh_fingerprint(mesh);
        if fp != dtn.mesh_fingerprint {
            return Err(Error::Dtn(format!(
                "mesh fingerprint mismatch: file has {:016x}, supplied mesh hashes to {fp:016x}",
                dtn.mesh_fingerprint
            )));
        }
    }
    Ok(dtn)
}

struct LineCursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    fn new(text: &'a str) -> Self {
        LineCursor {
            lines: text
                .lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .collect(),
            pos: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let item = self.lines.get(self.pos).copied().ok_or_else(|| {
            Error::Dtn(format!(
                "file truncated at line {}, expected {what}",
                self.pos + 1
            ))
        })?;
        self.pos += 1;
        Ok(item)
    }

    fn read_complex(&mut self, count: usize, what: &str) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let (ln, l) = self.next(&format!("{what} entry {k}"))?;
            let mut it = l.split_whitespace();
            let re: f64 = it
                .next()
                .ok_or_else(|| Error::Dtn(format!("line {ln}: missing real part")))?
                .parse()
                .map_err(|e| Error::Dtn(format!("line {ln}: bad real part: {e}")))?;
            let im: f64 = it
                .next()
                .ok_or_else(|| Error::Dtn(format!("line {ln}: missing imaginary part")))?
                .parse()
                .map_err(|e| Error::Dtn(format!("line {ln}: bad imaginary part: {e}")))?;
            out.push(Complex64::new(re, im));
        }
        Ok(out)
    }
}

fn keyed<'a>(line: (usize, &'a str), key: &str) -> Result<&'a str> {
    let (ln, l) = line;
    l.strip_prefix(key)
        .map(str::trim)
        .ok_or_else(|| Error::Dtn(format!("line {ln}: expected '{key} ...', found '{l}'")))
}

fn expect(line: (usize, &str), want: &str) -> Result<()> {
    if line.1 == want {
        Ok(())
    } else {
        Err(Error::Dtn(format!(
            "line {}: expected '{want}', found '{}'",
            line.0, line.1
        )))
    }
}

/// Parse the `WGDTN1` format.
pub fn parse_wgdtn1(text: &str) -> Result<DtnMatrix> {
    let mut cur = LineCursor::new(text);

    let (_, magic) = cur.next("magic")?;
    if magic != MAGIC {
        return Err(Error::Dtn(format!(
            "version mismatch: expected magic '{MAGIC}', found '{magic}'"
        )));
    }
    let omega: f64 = keyed(cur.next("omega")?, "omega")?
        .parse()
        .map_err(|e| Error::Dtn(format!("bad omega: {e}")))?;
    let ne: usize = keyed(cur.next("ne")?, "ne")?
        .parse()
        .map_err(|e| Error::Dtn(format!("bad ne: {e}")))?;
    let nm: usize = keyed(cur.next("nmodes")?, "nmodes")?
        .parse()
        .map_err(|e| Error::Dtn(format!("bad nmodes: {e}")))?;
    let sign = keyed(cur.next("sign")?, "sign")?.to_string();
    if sign != SIGN_CONVENTION {
        return Err(Error::Dtn(format!(
            "unsupported sign convention '{sign}' (this build writes '{SIGN_CONVENTION}')"
        )));
    }
    let units = keyed(cur.next("units")?, "units")?.to_string();
    let fingerprint = u64::from_str_radix(keyed(cur.next("fingerprint")?, "fingerprint")?, 16)
        .map_err(|e| Error::Dtn(format!("bad fingerprint: {e}")))?;

    expect(cur.next("betas")?, "betas")?;
    let betas = cur.read_complex(nm, "betas")?;
    expect(cur.next("classes")?, "classes")?;
    let (cln, classes_line) = cur.next("classes line")?;
    let classes: Vec<Classification> = if nm == 0 {
        Vec::new()
    } else {
        classes_line
            .split_whitespace()
            .map(|t| match t {
                "propagating" => Ok(Classification::Propagating),
                "evanescent" => Ok(Classification::Evanescent),
                "complex" => Ok(Classification::Complex),
                other => Err(Error::Dtn(format!("line {cln}: unknown class '{other}'"))),
            })
            .collect::<Result<_>>()?
    };
    if classes.len() != nm {
        return Err(Error::Dtn(format!(
            "expected {nm} classes, found {}",
            classes.len()
        )));
    }
    expect(cur.next("clusters")?, "clusters")?;
    let (iln, ids_line) = cur.next("clusters line")?;
    let cluster_ids: Vec<usize> = if nm == 0 {
        Vec::new()
    } else {
        ids_line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|e| Error::Dtn(format!("line {iln}: bad cluster id: {e}")))
            })
            .collect::<Result<_>>()?
    };
    if cluster_ids.len() != nm {
        return Err(Error::Dtn(format!(
            "expected {nm} cluster ids, found {}",
            cluster_ids.len()
        )));
    }

    expect(cur.next("matrix")?, "matrix")?;
    let mvals = cur.read_complex(ne * ne, "matrix")?;
    expect(cur.next("factors")?, "factors")?;
    expect(cur.next("w")?, "w")?;
    let wvals = cur.read_complex(ne * nm, "w")?;
    expect(cur.next("d")?, "d")?;
    let dvec = cur.read_complex(nm, "d")?;
    expect(cur.next("gram")?, "gram")?;
    let gvals = cur.read_complex(nm * nm, "gram")?;
    expect(cur.next("end")?, "end")?;

    let matrix = DMatrix::from_fn(ne, ne, |i, j| mvals[i * ne + j]);
    let w = DMatrix::from_fn(ne, nm, |i, j| wvals[i * nm + j]);
    let gram = DMatrix::from_fn(nm, nm, |i, j| gvals[i * nm + j]);

    Ok(DtnMatrix {
        omega,
        n_e: ne,
        matrix,
        betas,
        classes,
        cluster_ids,
        w,
        dvec,
        gram,
        mesh_fingerprint: fingerprint,
        sign_convention: sign,
        units,
    })
}
