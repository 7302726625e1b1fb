//! Post-processing of raw eigenpairs into physical modes: branch selection
//! for `beta`, normalization under the modal pairing, orthogonality and
//! cluster structure, and consistency checks against the Schur-complement
//! form of the problem.
//!
//! A note on normalization: the pairing `a(u, u) = u^H (C - w^2 Me) u` is a
//! real quadratic form whose sign is a property of the mode, not of its
//! scaling — it is negative for propagating modes and positive for TE-like
//! evanescent ones. Normalization therefore lands on `|a(u, u)| = 1`, with a
//! sign that the cluster Gram matrices carry into the DtN assembly, and pins
//! the remaining free phase so the unconjugated self-pairing
//! `u^T (C - w^2 Me) u` equals +1 — the one normalization that is reachable
//! for every non-degenerate mode. Modes in genuinely complex conjugate pairs
//! have `a(u, u) = 0` and keep a unit 2-norm scaling instead; their
//! projection always runs through the cluster path.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen::RitzPair;
use crate::fem::{a_orth, scalar_helmholtz, PencilBlocks};
use crate::sparse::{norm2, rcm_order, BandedLu};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormState {
    Unnormalized,
    /// `|a(u, u)| = 1`; the sign of the real number `a(u, u)` is the mode's own.
    Normalized,
    /// `|a(u, u)|` vanishes at the scale of `||u||^2`; unit 2-norm instead.
    Degenerate,
}

/// Mode classification by the selected branch of `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Propagating,
    Evanescent,
    Complex,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Propagating => write!(f, "propagating"),
            Classification::Evanescent => write!(f, "evanescent"),
            Classification::Complex => write!(f, "complex"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mode {
    /// Eigenvalue `beta^2`.
    pub beta_sq: Complex64,
    /// Branch-selected propagation constant.
    pub beta: Complex64,
    /// Edge coefficients of the transverse field.
    pub u: Vec<Complex64>,
    /// Vertex coefficients of the scaled longitudinal field (`i beta E_3`).
    pub p: Vec<Complex64>,
    /// Pencil residual carried over from the eigensolver.
    pub residual: f64,
    pub norm_state: NormState,
}

impl Mode {
    pub fn classification(&self, real_tol: f64) -> Classification {
        let b = self.beta;
        if b.im.abs() <= real_tol * b.norm() {
            Classification::Propagating
        } else if b.re.abs() <= real_tol * b.norm() {
            Classification::Evanescent
        } else {
            Classification::Complex
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModeSet {
    pub omega: f64,
    pub n_edge_dofs: usize,
    pub n_vertex_dofs: usize,
    pub modes: Vec<Mode>,
    /// `beta^2` values dropped because they were numerically at cutoff.
    pub excluded_near_zero: Vec<Complex64>,
}

/// Tolerances for post-processing; all relative.
#[derive(Debug, Clone)]
pub struct ModeTols {
    /// Below this, `Im beta` is treated as zero (propagating branch).
    pub real_tol: f64,
    /// Pair relation threshold for `|beta_j^2 - conj(beta_k^2)|`.
    pub cluster_tol: f64,
    /// Orthogonality bound for pairs outside one cluster.
    pub orth_tol: f64,
    /// `|a(u,u)|` below this (times `||u||^2`) marks a degenerate mode.
    pub degenerate_tol: f64,
}

impl Default for ModeTols {
    fn default() -> Self {
        ModeTols {
            real_tol: 1e-8,
            cluster_tol: 1e-6,
            orth_tol: 1e-8,
            degenerate_tol: 1e-10,
        }
    }
}

/// Branch selection for `beta = sqrt(beta^2)`.
///
/// Real-positive when the root is real within `real_tol`, otherwise the root
/// with positive imaginary part: the outgoing or decaying branch for fields
/// `exp(i beta z)` on `z > 0`.
pub fn select_branch(beta_sq: Complex64, real_tol: f64) -> Result<Complex64> {
    if beta_sq == Complex64::default() {
        return Err(Error::InvalidArgument(
            "beta^2 = 0 has no branch (cutoff mode)".into(),
        ));
    }
    let root = beta_sq.sqrt();
    if root.im.abs() <= real_tol * root.norm() {
        Ok(Complex64::new(root.norm(), 0.0))
    } else if root.im > 0.0 {
        Ok(root)
    } else {
        Ok(-root)
    }
}

/// Split eigensolver output into modes: branch-select, classify, drop
/// numerically-cutoff eigenvalues (`|beta^2| < 1e-8 omega^2`).
pub fn modes_from_ritz(
    blocks: &PencilBlocks,
    omega: f64,
    pairs: &[RitzPair],
    tols: &ModeTols,
) -> Result<ModeSet> {
    let ne = blocks.n_edge_dofs;
    let nv = blocks.n_vertex_dofs;
    let mut modes = Vec::with_capacity(pairs.len());
    let mut excluded = Vec::new();
    for pair in pairs {
        if pair.vector.len() != ne + nv {
            return Err(Error::Dimension(format!(
                "eigenvector length {} does not match {} + {} dofs",
                pair.vector.len(),
                ne,
                nv
            )));
        }
        if pair.lambda.norm() < 1e-8 * omega * omega {
            excluded.push(pair.lambda);
            continue;
        }
        let beta = select_branch(pair.lambda, tols.real_tol)?;
        modes.push(Mode {
            beta_sq: pair.lambda,
            beta,
            u: pair.vector[..ne].to_vec(),
            p: pair.vector[ne..].to_vec(),
            residual: pair.residual,
            norm_state: NormState::Unnormalized,
        });
    }
    Ok(ModeSet {
        omega,
        n_edge_dofs: ne,
        n_vertex_dofs: nv,
        modes,
        excluded_near_zero: excluded,
    })
}

/// Normalize one mode so `|a(u, u)| = 1` and the unconjugated self-pairing
/// `u^T (C - w^2 Me) u` is real positive (exactly +1 for vectors that are
/// real up to a global phase). Scales and phase-rotates `u` and `p` together,
/// and is idempotent.
pub fn normalize_mode(
    blocks: &PencilBlocks,
    omega: f64,
    mode: &mut Mode,
    tols: &ModeTols,
) -> Result<()> {
    let unorm = norm2(&mode.u);
    if unorm == 0.0 {
        return Err(Error::InvalidArgument(
            "cannot normalize a mode with zero transverse field".into(),
        ));
    }
    let a = a_orth(blocks, omega, &mode.u, &mode.u);
    if a.norm() < tols.degenerate_tol * unorm * unorm {
        // self-orthogonal (complex-pair) or numerically degenerate mode
        let scale = 1.0 / unorm;
        for v in mode.u.iter_mut() {
            *v *= scale;
        }
        for v in mode.p.iter_mut() {
            *v *= scale;
        }
        mode.norm_state = NormState::Degenerate;
        return Ok(());
    }
    let mut scale = Complex64::new(1.0 / a.norm().sqrt(), 0.0);
    // pin the phase through the bilinear pairing, which (unlike the
    // sesquilinear one) sees the eigenvector's arbitrary global phase
    let cform = blocks.curl_form(omega);
    let cu = cform.matvec_c(&mode.u);
    let bilinear: Complex64 = mode.u.iter().zip(&cu).map(|(x, y)| x * y).sum();
    if bilinear.norm() > 1e-3 * a.norm() {
        scale *= Complex64::from_polar(1.0, -0.5 * bilinear.arg());
    }
    for v in mode.u.iter_mut() {
        *v *= scale;
    }
    for v in mode.p.iter_mut() {
        *v *= scale;
    }
    mode.norm_state = NormState::Normalized;
    Ok(())
}

/// Normalize every mode of a set.
pub fn normalize_all(
    blocks: &PencilBlocks,
    omega: f64,
    set: &mut ModeSet,
    tols: &ModeTols,
) -> Result<()> {
    for m in set.modes.iter_mut() {
        normalize_mode(blocks, omega, m, tols)?;
    }
    Ok(())
}

/// The full pairing matrix `O[j, k] = a(u_k, u_j)`.
///
/// For pairs with `|beta_j^2 - conj(beta_k^2)|` above the cluster threshold
/// the entries must vanish to `orth_tol`; violations indicate solver failure
/// and are the caller's to report, not exceptions.
pub fn orthogonality_matrix(
    blocks: &PencilBlocks,
    omega: f64,
    set: &ModeSet,
) -> DMatrix<Complex64> {
    let n = set.modes.len();
    let mut o = DMatrix::zeros(n, n);
    // one matvec pass per mode: O[j,k] = u_j^H (C - w^2 Me) u_k
    let cform = blocks.curl_form(omega);
    let applied: Vec<Vec<Complex64>> = set.modes.iter().map(|m| cform.matvec_c(&m.u)).collect();
    for j in 0..n {
        for k in 0..n {
            let mut acc = Complex64::default();
            for (uj, ak) in set.modes[j].u.iter().zip(&applied[k]) {
                acc += uj.conj() * ak;
            }
            o[(j, k)] = acc;
        }
    }
    o
}

/// A set of modes whose `beta^2` values are conjugate-paired within
/// tolerance, together with its Gram matrix under the modal pairing.
#[derive(Debug, Clone)]
pub struct ModeCluster {
    pub members: Vec<usize>,
    /// `gram[(k, l)] = a(u_l, u_k)` over members, in member order.
    pub gram: DMatrix<Complex64>,
    /// Singular Gram: the cluster cannot be projected and is excluded from
    /// DtN assembly.
    pub degenerate: bool,
}

/// Partition modes by the relation `beta_j^2 ~ conj(beta_k^2)` (transitive
/// closure) and compute per-cluster Gram matrices.
pub fn detect_clusters(
    blocks: &PencilBlocks,
    omega: f64,
    set: &ModeSet,
    cluster_tol: f64,
) -> Vec<ModeCluster> {
    let n = set.modes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
            r
        } else {
            i
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let lj = set.modes[j].beta_sq;
            let lk = set.modes[k].beta_sq;
            let scale = lj.norm().max(lk.norm()).max(1.0);
            if (lj - lk.conj()).norm() <= cluster_tol * scale {
                let (rj, rk) = (find(&mut parent, j), find(&mut parent, k));
                if rj != rk {
                    parent[rj] = rk;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut clusters = Vec::new();
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort_by_key(|r| groups[r][0]);
    for r in roots {
        let members = groups[&r].clone();
        let m = members.len();
        let mut gram = DMatrix::zeros(m, m);
        for (kk, &k) in members.iter().enumerate() {
            for (ll, &l) in members.iter().enumerate() {
                gram[(kk, ll)] = a_orth(blocks, omega, &set.modes[l].u, &set.modes[k].u);
            }
        }
        let svd = gram.clone().svd(false, false);
        let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
        let smin = svd
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let degenerate = !(smax > 0.0) || smin <= 1e-8 * smax;
        clusters.push(ModeCluster {
            members,
            gram,
            degenerate,
        });
    }
    clusters
}

/// Residual of the mode in the Schur-complement (transverse-only) form:
///
/// ```text
/// r = (C - w^2 Me) u + beta^2 (Mmu u + G s),   (Kv - w^2 Mv) s = -Gdiv u
/// ```
///
/// returned as `||r||_2 / ||u||_2`. Small for converged modes of either
/// pencil; the auxiliary solve realizes the inverse scalar Helmholtz operator,
/// so the check requires `omega` away from cutoffs.
pub fn schur_residual(blocks: &PencilBlocks, omega: f64, mode: &Mode) -> Result<f64> {
    let w2 = omega * omega;
    let ne = blocks.n_edge_dofs;
    assert_eq!(mode.u.len(), ne);
    let cu = blocks.c.matvec_c(&mode.u);
    let meu = blocks.me.matvec_c(&mode.u);
    let mmuu = blocks.mmu.matvec_c(&mode.u);

    let gs = if blocks.n_vertex_dofs > 0 {
        let rhs: Vec<Complex64> = blocks
            .gdiv
            .matvec_c(&mode.u)
            .into_iter()
            .map(|v| -v)
            .collect();
        let helm_c = scalar_helmholtz(blocks, omega).to_complex();
        let perm = rcm_order(&helm_c);
        let lu = BandedLu::factor(&helm_c.permute_sym(&perm)).map_err(|e| {
            Error::Factorization(format!("scalar Helmholtz solve at omega={omega}: {e}"))
        })?;
        let mut w: Vec<Complex64> = perm.iter().map(|&old| rhs[old]).collect();
        lu.solve_in_place(&mut w);
        let mut s = vec![Complex64::default(); blocks.n_vertex_dofs];
        for (new, &old) in perm.iter().enumerate() {
            s[old] = w[new];
        }
        blocks.g.matvec_c(&s)
    } else {
        vec![Complex64::default(); ne]
    };

    let lambda = mode.beta_sq;
    let mut r = vec![Complex64::default(); ne];
    for i in 0..ne {
        r[i] = cu[i] - w2 * meu[i] + lambda * (mmuu[i] + gs[i]);
    }
    Ok(norm2(&r) / norm2(&mode.u))
}

/// Report of the conjugation-symmetry check on the computed `beta^2` multiset.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    /// Indices whose conjugate has no partner in the set, with the defect.
    pub unmatched: Vec<(usize, f64)>,
    /// Largest matching defect over all modes.
    pub max_defect: f64,
    pub pass: bool,
}

/// Verify the computed `beta^2` multiset is closed under conjugation.
///
/// With real materials the pencil is real, so the discrete spectrum is
/// conjugation-symmetric; an unmatched complex eigenvalue means the
/// truncated mode set split a conjugate pair (or the solver failed).
pub fn spectral_symmetry_check(set: &ModeSet, tol: f64) -> SymmetryReport {
    let n = set.modes.len();
    let mut used = vec![false; n];
    let mut unmatched = Vec::new();
    let mut max_defect = 0.0f64;
    for j in 0..n {
        if used[j] {
            continue;
        }
        let lj = set.modes[j].beta_sq;
        let scale = lj.norm().max(1.0);
        // best unused partner for conj(lambda_j); a real eigenvalue may
        // partner with itself
        let mut best = (f64::INFINITY, usize::MAX);
        for (k, mk) in set.modes.iter().enumerate() {
            if k != j && used[k] {
                continue;
            }
            let d = (mk.beta_sq - lj.conj()).norm();
            if d < best.0 {
                best = (d, k);
            }
        }
        let defect = best.0 / scale;
        if defect <= tol {
            used[j] = true;
            if best.1 != j && best.1 != usize::MAX {
                used[best.1] = true;
            }
            max_defect = max_defect.max(defect);
        } else {
            unmatched.push((j, defect));
        }
    }
    SymmetryReport {
        pass: unmatched.is_empty(),
        unmatched,
        max_defect,
    }
}

/// Report of the sector-clustering check.
#[derive(Debug, Clone)]
pub struct SectorReport {
    /// Modes outside both sectors around the negative real axis.
    pub violators: Vec<usize>,
    pub count_exempt: usize,
    pub pass: bool,
}

/// Check that all but at most `count_exempt` eigenvalues lie within `delta`
/// of the negative real axis (`|arg(beta^2) -+ pi| < delta`).
///
/// Large-magnitude `beta^2` cluster there — the strongly evanescent regime —
/// while at most finitely many (the propagating and slowly decaying modes)
/// may sit elsewhere.
pub fn sector_check(set: &ModeSet, delta: f64, count_exempt: usize) -> SectorReport {
    let mut violators = Vec::new();
    for (i, m) in set.modes.iter().enumerate() {
        let arg = m.beta_sq.arg();
        let dist = (arg - std::f64::consts::PI)
            .abs()
            .min((arg + std::f64::consts::PI).abs());
        if dist > delta {
            violators.push(i);
        }
    }
    SectorReport {
        pass: violators.len() <= count_exempt,
        violators,
        count_exempt,
    }
}

/// CSV mode table: index, beta^2, beta, classification, residuals.
pub fn mode_table_csv(blocks: &PencilBlocks, set: &ModeSet, tols: &ModeTols) -> Result<String> {
    let mut out = String::from(
        "index,re_beta_sq,im_beta_sq,re_beta,im_beta,classification,residual,schur_residual\n",
    );
    for (i, m) in set.modes.iter().enumerate() {
        let sr = schur_residual(blocks, set.omega, m)?;
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.3e},{:.3e}\n",
            i,
            m.beta_sq.re,
            m.beta_sq.im,
            m.beta.re,
            m.beta.im,
            m.classification(tols.real_tol),
            m.residual,
            sr
        ));
    }
    Ok(out)
}
