//! The four subcommands: solve, dtn, verify, convergence.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use wgmodes::dtn::{build_dtn, export_dtn, mesh_fingerprint, DtnMatrix};
use wgmodes::eigen::{cutoff_distance, shift_invert_arnoldi, ShiftInvertOpts};
use wgmodes::fem::{assemble_blocks, build_dofmap, pencil_vd1, pencil_vd2, DofMap, PencilBlocks};
use wgmodes::materials::{parse_materials, MaterialMap};
use wgmodes::mesh::{generate_rect_mesh, parse_mesh, refine_uniform, Mesh};
use wgmodes::modes::{
    detect_clusters, mode_table_csv, modes_from_ritz, normalize_all, orthogonality_matrix,
    schur_residual, sector_check, spectral_symmetry_check, ModeSet, ModeTols,
};

use crate::config::RunConfig;

/// A failure routed to one of the documented exit codes.
pub struct Failure {
    pub category: &'static str,
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn cutoff(message: String) -> Self {
        Failure {
            category: "cutoff",
            code: 2,
            message,
        }
    }
    pub fn solver(message: String) -> Self {
        Failure {
            category: "solver",
            code: 3,
            message,
        }
    }
    pub fn validation(message: String) -> Self {
        Failure {
            category: "validation",
            code: 4,
            message,
        }
    }
    pub fn io(message: String) -> Self {
        Failure {
            category: "io",
            code: 5,
            message,
        }
    }
}

pub type CmdResult<T> = Result<T, Failure>;

fn lib_err(e: wgmodes::Error) -> Failure {
    use wgmodes::Error::*;
    match e {
        Io(e) => Failure::io(e.to_string()),
        Factorization(_) | NonConvergence { .. } => Failure::solver(e.to_string()),
        _ => Failure::validation(e.to_string()),
    }
}

pub struct Prepared {
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub blocks: PencilBlocks,
    pub omega: f64,
    pub sigma: Complex64,
    pub tols: ModeTols,
    pub cutoff_dist: f64,
}

fn load_mesh(cfg: &RunConfig) -> CmdResult<Mesh> {
    if let Some((a, b, nx, ny)) = cfg.rect {
        return generate_rect_mesh(a, b, nx, ny).map_err(lib_err);
    }
    let path = cfg.mesh.as_ref().expect("validated");
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read mesh {}: {e}", path.display())))?;
    parse_mesh(&text).map_err(lib_err)
}

fn load_materials(cfg: &RunConfig, mesh: &Mesh) -> CmdResult<MaterialMap> {
    match &cfg.materials {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::io(format!("cannot read materials {}: {e}", path.display()))
            })?;
            let base = path.parent().unwrap_or(Path::new("."));
            parse_materials(&text, base, mesh).map_err(lib_err)
        }
        // vacuum default for generated geometries
        None => Ok(MaterialMap::uniform(1.0, 1.0)),
    }
}

fn mode_tols(cfg: &RunConfig) -> ModeTols {
    ModeTols {
        real_tol: cfg.tol_real,
        cluster_tol: cfg.tol_cluster,
        orth_tol: cfg.tol_orth,
        degenerate_tol: 1e-10,
    }
}

/// Shared front end: geometry, materials, assembly and the cutoff gate.
pub fn prepare(cfg: &RunConfig) -> CmdResult<Prepared> {
    let omega = cfg.omega.expect("validated");
    let mesh = load_mesh(cfg)?;
    let materials = load_materials(cfg, &mesh)?;
    let pec: BTreeSet<String> = cfg.pec_tags.iter().cloned().collect();
    let dofmap = build_dofmap(&mesh, &pec).map_err(lib_err)?;
    if dofmap.n_edge_dofs() == 0 {
        return Err(Failure::validation(
            "mesh has no free edge dofs (everything is PEC); nothing to solve".into(),
        ));
    }
    let blocks = assemble_blocks(&mesh, &dofmap, &materials).map_err(lib_err)?;

    let cutoff_dist = cutoff_distance(&blocks, omega).map_err(lib_err)?;
    if cutoff_dist < cfg.tol_cutoff {
        return Err(Failure::cutoff(format!(
            "omega = {omega} is a cutoff frequency of this cross-section: relative distance \
             {cutoff_dist:.3e} to the nearest discrete Dirichlet eigenvalue is below the \
             tolerance {:.3e}; the modal problem degenerates there",
            cfg.tol_cutoff
        )));
    }

    let sigma = match cfg.shift {
        Some((re, im)) => Complex64::new(re, im),
        None => Complex64::new(omega * omega * materials.max_eps_mu(), 0.0),
    };
    Ok(Prepared {
        mesh,
        dofmap,
        blocks,
        omega,
        sigma,
        tols: mode_tols(cfg),
        cutoff_dist,
    })
}

/// Solve the vd1 pencil near the shift, with shift-perturbation retries when
/// the factorization lands on an eigenvalue.
pub fn solve_modes(p: &Prepared, cfg: &RunConfig) -> CmdResult<ModeSet> {
    let n_e = p.blocks.n_edge_dofs;
    let nev = cfg.num_modes.min(n_e);
    if nev < cfg.num_modes {
        eprintln!(
            "note: requested {} modes but the pencil has only {n_e} finite eigenvalues; \
             solving for {nev}",
            cfg.num_modes
        );
    }
    let (a1, b1) = pencil_vd1(&p.blocks, p.omega);
    let mut last: Option<wgmodes::Error> = None;
    for attempt in 0..3 {
        let sigma = p.sigma * (1.0 + attempt as f64 * 1e-3)
            + Complex64::new(0.0, attempt as f64 * 1e-4 * p.sigma.norm().max(1.0));
        let mut opts = ShiftInvertOpts::new(sigma, nev);
        opts.tol = cfg.tol_solver;
        opts.krylov_dim = (2 * nev + 36).min(a1.nrows());
        match shift_invert_arnoldi(&a1, &b1, &opts) {
            Ok(pairs) => {
                if attempt > 0 {
                    eprintln!("note: shift perturbed to {sigma} after factorization failure");
                }
                let take = nev.min(pairs.len());
                let mut set = modes_from_ritz(&p.blocks, p.omega, &pairs[..take], &p.tols)
                    .map_err(lib_err)?;
                normalize_all(&p.blocks, p.omega, &mut set, &p.tols).map_err(lib_err)?;
                for l in &set.excluded_near_zero {
                    eprintln!("note: excluded numerically-cutoff eigenvalue beta^2 = {l}");
                }
                audit_modes(&set, &p.tols)?;
                return Ok(set);
            }
            Err(e @ wgmodes::Error::Factorization(_)) => last = Some(e),
            Err(e) => return Err(lib_err(e)),
        }
    }
    Err(Failure::solver(format!(
        "factorization failed for every shift attempt: {}",
        last.expect("at least one attempt")
    )))
}

/// Post-solve validation: the mode invariants the caller is entitled to.
fn audit_modes(set: &ModeSet, tols: &ModeTols) -> CmdResult<()> {
    for (i, m) in set.modes.iter().enumerate() {
        if (m.beta * m.beta - m.beta_sq).norm() > 1e-10 * m.beta_sq.norm().max(1e-300) {
            return Err(Failure::validation(format!(
                "mode {i}: beta^2 does not square back to the eigenvalue"
            )));
        }
        let real_positive = m.beta.im == 0.0 && m.beta.re > 0.0;
        let upper = m.beta.im > tols.real_tol * m.beta.norm();
        if !(real_positive ^ upper) {
            return Err(Failure::validation(format!(
                "mode {i}: branch rule violated"
            )));
        }
    }
    Ok(())
}

fn write_or_stdout(path: Option<&Path>, content: &str, what: &str) -> CmdResult<()> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Failure::io(format!("cannot write {what} {}: {e}", p.display()))),
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| Failure::io(e.to_string()))
        }
    }
}

fn timestamp_line(cfg: &RunConfig) -> String {
    if cfg.timestamp {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("# generated at unix time {now}\n")
    } else {
        String::new()
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> CmdResult<()> {
    let p = prepare(cfg)?;
    let set = solve_modes(&p, cfg)?;
    let csv = mode_table_csv(&p.blocks, &set, &p.tols).map_err(lib_err)?;
    let content = format!("{}{csv}", timestamp_line(cfg));
    write_or_stdout(cfg.out.as_deref(), &content, "mode table")?;
    if let Some(path) = &cfg.fields_out {
        wgmodes::vtk::export_fields(&p.mesh, &p.dofmap, &set, path).map_err(lib_err)?;
    }
    let prop = set.modes.iter().filter(|m| m.beta_sq.re > 0.0).count();
    eprintln!(
        "solved {} modes at omega = {} ({} propagating); cutoff distance {:.3e}",
        set.modes.len(),
        p.omega,
        prop,
        p.cutoff_dist
    );
    Ok(())
}

pub fn cmd_dtn(cfg: &RunConfig) -> CmdResult<()> {
    let Some(dtn_out) = &cfg.dtn_out else {
        return Err(Failure::validation(
            "the dtn command requires --dtn-out FILE".into(),
        ));
    };
    let p = prepare(cfg)?;
    let set = solve_modes(&p, cfg)?;
    let clusters = detect_clusters(&p.blocks, p.omega, &set, p.tols.cluster_tol);
    if let Some(bad) = clusters.iter().find(|c| c.degenerate) {
        return Err(Failure::validation(format!(
            "degenerate mode cluster (singular Gram matrix): modes {:?} cannot enter the DtN",
            bad.members
        )));
    }
    let fp = mesh_fingerprint(&p.mesh);
    let dtn = build_dtn(&p.blocks, p.omega, &set, &clusters, fp).map_err(lib_err)?;
    export_dtn(&dtn, dtn_out).map_err(lib_err)?;

    for (j, m) in set.modes.iter().enumerate() {
        eprintln!(
            "mode {j:2}: beta = {:+.9e} {:+.9e}i  {}",
            m.beta.re,
            m.beta.im,
            m.classification(p.tols.real_tol)
        );
    }
    eprintln!(
        "truncation indicator (relative weight of the farthest cluster): {:.3e}",
        truncation_indicator(&p, &set, &clusters, &dtn)
    );
    eprintln!(
        "wrote {} ({} modes, n_e = {})",
        dtn_out.display(),
        set.modes.len(),
        dtn.n_e
    );
    Ok(())
}

/// Relative Frobenius weight of the farthest cluster's contribution: an
/// indicator of how converged the modal truncation is.
fn truncation_indicator(
    p: &Prepared,
    set: &ModeSet,
    clusters: &[wgmodes::modes::ModeCluster],
    dtn: &DtnMatrix,
) -> f64 {
    if clusters.len() < 2 {
        return f64::NAN;
    }
    let farthest = clusters
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            let da = a
                .members
                .iter()
                .map(|&i| (set.modes[i].beta_sq - p.sigma).norm())
                .fold(0.0, f64::max);
            let db = b
                .members
                .iter()
                .map(|&i| (set.modes[i].beta_sq - p.sigma).norm())
                .fold(0.0, f64::max);
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    let kept: Vec<usize> = (0..set.modes.len())
        .filter(|i| !clusters[farthest].members.contains(i))
        .collect();
    let subset = ModeSet {
        omega: set.omega,
        n_edge_dofs: set.n_edge_dofs,
        n_vertex_dofs: set.n_vertex_dofs,
        modes: kept.iter().map(|&i| set.modes[i].clone()).collect(),
        excluded_near_zero: vec![],
    };
    let sub_clusters = detect_clusters(&p.blocks, p.omega, &subset, p.tols.cluster_tol);
    let Ok(smaller) = build_dtn(&p.blocks, p.omega, &subset, &sub_clusters, 0) else {
        return f64::NAN;
    };
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..dtn.n_e {
        for j in 0..dtn.n_e {
            num += (dtn.matrix[(i, j)] - smaller.matrix[(i, j)]).norm_sqr();
            den += dtn.matrix[(i, j)].norm_sqr();
        }
    }
    (num / den.max(1e-300)).sqrt()
}

pub struct VerifyCheck {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
}

/// Run every verification property and return the report.
pub fn run_verification(p: &Prepared, cfg: &RunConfig) -> CmdResult<Vec<VerifyCheck>> {
    let set = solve_modes(p, cfg)?;
    let mut checks = Vec::new();

    // orthogonality outside conjugate clusters
    let o = orthogonality_matrix(&p.blocks, p.omega, &set);
    let mut worst_off = 0.0f64;
    let mut worst_diag = 0.0f64;
    for j in 0..set.modes.len() {
        if set.modes[j].norm_state == wgmodes::modes::NormState::Normalized {
            worst_diag = worst_diag.max((o[(j, j)].norm() - 1.0).abs());
        }
        for k in 0..set.modes.len() {
            if j == k {
                continue;
            }
            let lj = set.modes[j].beta_sq;
            let lk = set.modes[k].beta_sq;
            if (lj - lk.conj()).norm() > p.tols.cluster_tol * lj.norm().max(lk.norm()).max(1.0) {
                worst_off = worst_off.max(o[(j, k)].norm());
            }
        }
    }
    checks.push(VerifyCheck {
        name: "orthogonality",
        pass: worst_off <= p.tols.orth_tol,
        measured: worst_off,
        bound: p.tols.orth_tol,
    });
    checks.push(VerifyCheck {
        name: "normalization",
        pass: worst_diag <= 1e-10,
        measured: worst_diag,
        bound: 1e-10,
    });

    let sym = spectral_symmetry_check(&set, 1e-8);
    checks.push(VerifyCheck {
        name: "spectral-symmetry",
        pass: sym.pass,
        measured: sym
            .unmatched
            .iter()
            .map(|&(_, d)| d)
            .fold(sym.max_defect, f64::max),
        bound: 1e-8,
    });

    let prop = set.modes.iter().filter(|m| m.beta_sq.re > 0.0).count();
    let sec = sector_check(&set, 0.1, prop);
    checks.push(VerifyCheck {
        name: "sector-clustering",
        pass: sec.pass,
        measured: sec.violators.len() as f64,
        bound: prop as f64,
    });

    let mut worst_schur = 0.0f64;
    for m in &set.modes {
        worst_schur = worst_schur.max(schur_residual(&p.blocks, p.omega, m).map_err(lib_err)?);
    }
    checks.push(VerifyCheck {
        name: "schur-residual",
        pass: worst_schur <= 1e-6,
        measured: worst_schur,
        bound: 1e-6,
    });

    // vd1 vs vd2 cross-solve within |lambda| <= 4 omega^2
    let (a2, b2) = pencil_vd2(&p.blocks, p.omega);
    let nev = set.modes.len().max(1);
    let mut opts = ShiftInvertOpts::new(p.sigma, nev);
    opts.tol = cfg.tol_solver;
    opts.krylov_dim = (2 * nev + 36).min(a2.nrows());
    let pairs2 = shift_invert_arnoldi(&a2, &b2, &opts).map_err(lib_err)?;
    let window = 4.0 * p.omega * p.omega;
    let mut worst_cross = 0.0f64;
    for m in set.modes.iter().filter(|m| m.beta_sq.norm() <= window) {
        let best = pairs2
            .iter()
            .map(|q| (q.lambda - m.beta_sq).norm() / m.beta_sq.norm().max(1.0))
            .fold(f64::INFINITY, f64::min);
        worst_cross = worst_cross.max(best);
    }
    checks.push(VerifyCheck {
        name: "vd1-vd2-equivalence",
        pass: worst_cross <= 1e-6,
        measured: worst_cross,
        bound: 1e-6,
    });

    Ok(checks)
}

pub fn cmd_verify(cfg: &RunConfig) -> CmdResult<()> {
    let p = prepare(cfg)?;
    let checks = run_verification(&p, cfg)?;
    for c in &checks {
        println!(
            "{} {:<22} measured {:.3e}  bound {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.bound
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    eprintln!(
        "verification: {}/{} properties hold",
        checks.len() - failed,
        checks.len()
    );
    Ok(())
}

pub fn cmd_convergence(cfg: &RunConfig) -> CmdResult<()> {
    let Some((a, b, nx, ny)) = cfg.rect else {
        return Err(Failure::validation(
            "analytic convergence references exist only for rectangle configs; use --rect a,b,nx,ny"
                .into(),
        ));
    };
    if cfg.levels < 3 {
        return Err(Failure::validation(format!(
            "convergence needs at least 3 levels, got {}",
            cfg.levels
        )));
    }
    let omega = cfg.omega.expect("validated");
    let base = generate_rect_mesh(a, b, nx, ny).map_err(lib_err)?;
    // uniform constant materials are required for the closed-form reference
    let (eps, mu) = match &cfg.materials {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::io(format!("cannot read materials {}: {e}", path.display()))
            })?;
            let materials = parse_materials(&text, path.parent().unwrap_or(Path::new(".")), &base)
                .map_err(lib_err)?;
            materials.constants_for("0").ok_or_else(|| {
                Failure::validation(
                    "the analytic convergence reference needs constant materials for region '0'"
                        .into(),
                )
            })?
        }
        None => (1.0, 1.0),
    };
    let eps_mu = eps * mu;
    let analytic_te10 = omega * omega * eps_mu - (std::f64::consts::PI / a).powi(2);
    if analytic_te10 <= 0.0 {
        return Err(Failure::validation(format!(
            "TE10 does not propagate at omega = {omega}; pick a frequency above the first cutoff"
        )));
    }

    println!("level,h_factor,beta_sq,abs_error,observed_order");
    let mut mesh = base;
    let mut prev_err: Option<f64> = None;
    let mut errors = Vec::new();
    for level in 0..cfg.levels {
        let dofmap =
            build_dofmap(&mesh, &cfg.pec_tags.iter().cloned().collect()).map_err(lib_err)?;
        let materials = MaterialMap::uniform(eps, mu);
        let blocks = assemble_blocks(&mesh, &dofmap, &materials).map_err(lib_err)?;
        let (a1, b1) = pencil_vd1(&blocks, omega);
        let mut opts = ShiftInvertOpts::new(Complex64::new(omega * omega * eps_mu, 0.0), 6);
        opts.krylov_dim = 48.min(a1.nrows());
        opts.tol = cfg.tol_solver;
        let pairs = shift_invert_arnoldi(&a1, &b1, &opts).map_err(lib_err)?;
        let te10 = pairs
            .iter()
            .filter(|p| p.lambda.im.abs() < 1e-6 * p.lambda.norm() && p.lambda.re > 0.0)
            .map(|p| p.lambda.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let err = (te10 - analytic_te10).abs();
        let order = prev_err.map(|e| (e / err).log2());
        println!(
            "{level},{},{te10:.12e},{err:.6e},{}",
            1 << level,
            order.map_or("-".to_string(), |o| format!("{o:.3}"))
        );
        errors.push(err);
        prev_err = Some(err);
        if level + 1 < cfg.levels {
            mesh = refine_uniform(&mesh).map_err(lib_err)?;
        }
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    eprintln!("observed orders: {orders:?}");
    Ok(())
}
