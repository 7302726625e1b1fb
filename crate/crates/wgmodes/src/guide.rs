//! The narrative guide, compiled as doc-tests.
//!
//! Each chapter of the mdbook under `book/` is included here verbatim, so
//! `cargo test --doc` runs every code listing in the book and the prose can
//! never drift from the API. Build the rendered book with `mdbook build book`
//! from the workspace root.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/meshes.md")]
pub mod meshes {}

#[doc = include_str!("../../../book/src/formulation.md")]
pub mod formulation {}

#[doc = include_str!("../../../book/src/solving.md")]
pub mod solving {}

#[doc = include_str!("../../../book/src/dtn.md")]
pub mod dtn_chapter {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
