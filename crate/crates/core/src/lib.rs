//! Isotropy, cycline pairs and closedness of the isotropy interior for finite
//! directed graphs, finite k-graphs and sequentially presented topological graphs.

pub mod decision;
pub mod degree;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod isotropy;
pub mod kgraph;
pub mod pathspace;
pub mod random;
pub mod seqgraph;

pub use degree::{Degree, Shift};
pub use error::{Error, Result};
pub use graph::DirectedGraph;
pub use kgraph::{KGraph, Morphism};
pub use pathspace::EPPath;

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `text`.
pub fn hash_text(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
