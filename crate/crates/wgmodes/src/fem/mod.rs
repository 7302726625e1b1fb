//! Mixed finite-element machinery: dof management for the edge/vertex pair
//! and assembly of every sparse bilinear-form block the eigenvalue pencils,
//! the orthogonality form and the scalar Helmholtz operator are built from.
//!
//! Discretization: lowest-order edge elements (Whitney 1-forms) for the
//! transverse field, continuous piecewise linears for the longitudinal field.
//! This is the smallest stable pair for the mixed formulation; everything is
//! integrated with one fixed 7-point degree-5 triangle rule so graded
//! materials need no special casing.

mod assembly;
mod dofmap;
mod interp;
mod local;
mod pencils;

pub use assembly::{assemble_blocks, PencilBlocks};
pub use dofmap::{build_dofmap, DofMap};
pub use interp::interpolate_hcurl;
pub use local::{local_element_matrices, whitney_at, LocalBlocks};
pub use pencils::{a_orth, pencil_vd1, pencil_vd2, scalar_helmholtz};
