//! Join-size estimation from gap-box certificates.
//!
//! The pipeline encodes relational tables onto a power-of-two lattice, turns
//! each table into the set of dyadic boxes that hug its tuples without
//! touching them, and indexes those boxes in per-table tries. Join rows are
//! exactly the lattice points no box covers, so counting and sampling the
//! uncovered region estimates the join size and draws uniform join rows
//! without ever materializing the join.

pub mod dyadic;
pub mod error;
pub mod estimator;
pub mod gapbox;
pub mod geom;
pub mod ingest;
pub mod klee;
pub mod oracle;
pub mod schema;
pub mod trie;

pub use error::{Error, Result};
