//! Distributed consensus under noisy, failing links: spectral graph tools,
//! random network models, the decreasing-weight (A-ND) and constant-weight
//! repeated (A-NC) algorithms, and their analytical bounds.

// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anc;
pub mod and;
pub mod engine;
pub mod error;
pub mod models;
pub mod montecarlo;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use models::{LinkFailureModel, NoiseModel};
pub use rng::RngStream;
pub use spectral::{Graph, Laplacian};
