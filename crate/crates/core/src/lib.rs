//! Symbolic homotopy calculus for the triple suspension of a simply-connected
//! closed 6-manifold: elementary complexes, their homotopy tables, attaching
//! vectors into wedges, reduction to canonical form and the resulting
//! decomposition lists.

pub mod abelian;
pub mod catalog;
pub mod classify;
pub mod cohomops;
pub mod descriptor;
pub mod error;
pub mod oracle;
pub mod reduce;
pub mod wedgemap;

pub use error::{Error, Result};
