//! Simulators for distributed first-order optimization over communication graphs.
//!
//! The crate covers the continuous-time flows (gradient flow and distributed
//! gradient flow, integrated with fixed-step RK4), the discrete recursions
//! (SGD, D-SGD and their annealed variants), and the diagnostics used to study
//! them: critical-point classification, stable subspaces of quadratic models,
//! Gibbs-density quadrature and Monte Carlo basin tallies.
//!
//! ```
//! use netgrad::graph::Graph;
//!
//! let g = Graph::petersen();
//! assert_eq!(g.edge_count(), 15);
//! assert!(g.is_connected());
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod noise;
pub mod objective;
pub mod schedule;

pub use error::{Error, Result};
