//! Finite-element analysis of waveguide cross-sections.
//!
//! `wgmodes` computes the propagating and evanescent electromagnetic modes of a
//! translationally invariant waveguide at a fixed angular frequency `omega`.
//! The cross-section is meshed with triangles; the transverse field lives in
//! lowest-order edge elements, the longitudinal field in continuous piecewise
//! linears. The modal eigenvalue problem is a non-symmetric generalized pencil
//! in `beta^2` (the squared propagation constant), solved by shift-invert
//! Arnoldi with a banded direct factorization.
//!
//! From a set of computed modes the crate assembles a dense modal
//! Dirichlet-to-Neumann matrix on the free-edge trace space, exported in the
//! `WGDTN1` ASCII format for consumption by exterior 3D solvers.
//!
//! Units: lengths are dimensionless, the speed of light is 1, `omega` is in
//! radians per unit length, and epsilon/mu are relative material constants.
//!
//! The narrative guide in `book/` walks through the same API; its code
//! listings double as this crate's doc-tests (see [`guide`]).

pub mod analytic;
pub mod dtn;
pub mod eigen;
pub mod fem;
pub mod guide;
pub mod materials;
pub mod mesh;
pub mod modes;
pub mod quadrature;
pub mod sparse;
pub mod vtk;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed mesh or material document. `line` is 1-based.
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    /// Structurally invalid mesh (orientation, dangling indices, ...).
    #[error("invalid mesh: {0}")]
    MeshInvalid(String),

    /// Material map inconsistent with the mesh or out of range.
    #[error("material error: {0}")]
    Material(String),

    /// Degree-of-freedom construction failed.
    #[error("dof error: {0}")]
    Dof(String),

    /// A direct factorization broke down (shift too close to the spectrum,
    /// or a genuinely singular operator).
    #[error("factorization failed: {0}")]
    Factorization(String),

    /// The eigensolver did not reach the requested tolerance.
    #[error("eigensolver did not converge: wanted {wanted}, converged {converged}, worst residual {worst_residual:.3e}")]
    NonConvergence {
        wanted: usize,
        converged: usize,
        worst_residual: f64,
    },

    /// Operand dimensions do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid argument outside of file parsing.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A mode cluster whose Gram matrix is numerically singular.
    #[error("degenerate mode cluster: modes {0:?} excluded")]
    DegenerateCluster(Vec<usize>),

    /// DtN file problems beyond plain formatting.
    #[error("dtn file error: {0}")]
    Dtn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
