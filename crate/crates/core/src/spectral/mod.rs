//! Graphs, Laplacians, the symmetric eigensolver and consensus-subspace geometry.

pub mod generate;
pub mod graph;
pub mod jacobi;
pub mod laplacian;

pub use generate::{erdos_renyi, random_regular};
pub use graph::Graph;
pub use laplacian::{average, distance_to_consensus, Laplacian};
