//! Exact construction of k-factors in regular bipartite multigraphs.
//!
//! The pipeline starts from the uniform fractional matching, rounds it by
//! alternating cycle updates until the support is a forest, matches the
//! forest (pruning degree-2 rays first), and reduces 2-factors to perfect
//! matchings by splitting every vertex in two. Infinite shift graphs are
//! explored through finite windows, where boundary effects show up as a
//! measurable unresolved fraction.

pub mod error;
pub mod generators;
pub mod graph;
pub mod pipeline;
pub mod rounding;
pub mod tree_matching;
pub mod verification;

pub use error::{Error, Result};
