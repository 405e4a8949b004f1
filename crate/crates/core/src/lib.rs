//! Random DP-covers of graphs.
//!
//! A full `k`-fold cover of a graph assigns every edge a permutation of
//! `0..k`; the cover is colorable when one index can be picked per vertex so
//! that no edge's permutation maps one pick onto the other. This crate samples
//! covers uniformly, decides and counts independent transversals exactly, runs
//! the greedy transversal procedure, evaluates first and second moment bounds
//! and estimates colorability probabilities by seeded Monte Carlo.

pub mod analysis;
pub mod cover;
pub mod degeneracy;
pub mod density;
mod error;
pub mod experiment;
pub mod graph;
pub mod greedy;
pub mod report;
pub mod rng;
pub mod script;
pub mod stats;
pub mod transversal;

pub use analysis::{BoundReport, MomentParams};
pub use cover::{sample_cover, Cover};
pub use degeneracy::DegeneracyOrdering;
pub use density::DensityReport;
pub use error::{Error, Guard, Result};
pub use experiment::{estimate_probability, sweep_k, SweepRow};
pub use graph::{Graph, Vertex};
pub use greedy::{gt_run, GtOutcome, SurvivalStats};
pub use rng::Seed;
pub use stats::{Estimate, Method};
pub use transversal::{BFoldTransversal, Transversal};
