//! Range graphs of simple random walks on the integer lattice.
//!
//! The crate builds the graph traced out by a lattice walk, finds its cut
//! times, computes graph-distance and effective-resistance profiles along
//! the walk (blockwise, glued at cut vertices), simulates the simple random
//! walk on the resulting graph and turns ensembles of all of the above into
//! scaling estimates.
//!
//! Module map:
//!
//! - [`lattice_walk`]: seeded trajectories and the `RWR4` trajectory file.
//! - [`range_graph`]: vertex/edge structure, degree measure, last-exit sums.
//! - [`cut_structure`]: linear-time cut times, brute-force oracle, gaps.
//! - [`network`]: unit-resistor networks and the linear solvers behind them.
//! - [`resistance_metrics`]: block chains, profiles, balls, covers.
//! - [`range_walker`]: walks on the range, exit times, heat kernels.
//! - [`scaling_lab`]: ensemble estimators and limit-law comparisons.
//! - [`stats`]: least squares, bootstrap, KS distances, reference laws.
//! - [`formats`]: text/CSV exports shared by the command line tools.

pub mod cut_structure;
mod error;
pub mod formats;
pub mod lattice_walk;
pub mod network;
pub mod range_graph;
pub mod range_walker;
pub mod resistance_metrics;
pub mod scaling_lab;
pub mod seeds;
pub mod stats;

pub use error::{Error, Result};
