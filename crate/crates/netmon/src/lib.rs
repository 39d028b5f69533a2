//! Simulation benchmark for dynamic-network monitoring.
//!
//! The crate generates dependent sequences of random networks from a
//! degree-corrected stochastic block model (DCSBM), injects a catalog of
//! structural and propensity changes, runs fifteen statistical-process-
//! monitoring methods against each sequence, and reports detection rate
//! and conditional expected delay per method.
//!
//! Modules:
//!
//! - [`graph`]: adjacency-matrix snapshots, geodesic distances, and the
//!   twelve global summary statistics consumed by the EWMA charts.
//! - [`generator`]: DCSBM sampling, the edge-retention dynamics, and the
//!   change-scenario catalog.
//! - [`monitors`]: the fifteen monitoring methods behind a common
//!   fit/update lifecycle.
//! - [`community`]: regularized spectral clustering for the
//!   unknown-labels setting.
//! - [`harness`]: replication orchestration, metrics, and result files.

pub mod community;
pub mod generator;
pub mod graph;
pub mod harness;
pub mod monitors;
pub(crate) mod seed;

pub use graph::{DistanceMatrix, Graph, StatisticKind, SummaryVector};
