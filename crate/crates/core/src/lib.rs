//! Per-node label memorization analysis for graph neural networks trained on
//! semi-supervised node classification.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: graph container, bundle IO, homophily metrics, synthetic
//!   homophily-controlled generation and train/val/test partitioning.
//! - [`nn`]: a small dense GNN stack (GCN, GraphSAGE, GATv2) with exact
//!   backpropagation, Adam and a full-batch training loop.
//! - [`memo`]: paired f/g training and memorization scores/rates.
//! - [`ntk`]: empirical node-level NTK and kernel alignment tracking.
//! - [`lds`]: feature-space label disagreement.
//! - [`rewire`]: cosine-similarity graph rewiring.
//! - [`lira`]: likelihood-ratio membership inference.
//! - [`stats`]: Welch t-test, Cohen's d and Pearson correlation.

pub mod error;
pub mod graph;
pub mod lds;
pub mod lira;
pub mod memo;
pub mod nn;
pub mod ntk;
pub mod rewire;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{Graph, Partition};
