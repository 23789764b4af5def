//! Binary latent causal models (BLCMs): binary hidden variables causing
//! mixed-type observations through a latent-to-observed bipartite graph.
//!
//! The crate is organized around five subsystems:
//!
//! - [`graph`]: bipartite graphs, latent DAGs, CPDAGs, and the purely
//!   structural identifiability checks (triangularity, double triangularity,
//!   subset condition, three-children necessity) plus SHD metrics.
//! - [`model`]: model parameter containers, nondegeneracy validation, exact
//!   marginal pmfs, and constructors for the known non-identifiable examples.
//! - [`oracle`]: population-level identification machinery — rank checks,
//!   Kruskal-condition verification, and recovery of the bipartite graph and
//!   configuration labels from column-scrambled conditional tables.
//! - [`simulate`]: seeded scenario construction and dataset generation.
//! - [`estimate`]: discretization, penalized EM with a grouped truncated
//!   lasso penalty, median-threshold graph extraction, and GES for the
//!   latent graph.
//!
//! Latent configurations `h ∈ {0,1}^K` are indexed throughout by
//! `h ↦ Σ_k h_k 2^(k-1)`, i.e. coordinate `k` (0-based) is bit `k` of the
//! index. All public indices in Rust APIs are 0-based; CSV/JSON reports use
//! the 1-based `k1..kK` / `x1..xJ` naming.

pub mod configs;
pub mod estimate;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod simulate;
