//! Stochastic graphical bilinear bandits.
//!
//! `n` agents on a graph each pick a node-arm; every directed edge `(i, j)`
//! pays `x_iᵀ M★ x_j` plus noise. The crate provides the reward model, a
//! ridge estimator with optimistic scoring, the greedy max-cut allocator,
//! the two optimistic pair policies and an explore-then-commit baseline,
//! exact and surrogate problem constants, and a seeded experiment runner.
//!
//! Numeric code is generic over [`Scalar`] (`f32`/`f64`); the aliases below
//! fix the precision used by the experiment runner.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bilinear;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod policy;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::{approx_max_cut, build_graph, partition_counts, CutCounts, Graph, GraphKind, Partition, Side};
pub use oracle::{Denominator, ProblemConstants};
pub use policy::PolicyKind;
pub use scalar::Scalar;

pub type ArmSet = bilinear::ArmSet<f64>;
pub type EnvironmentSpec = bilinear::EnvironmentSpec<f64>;
pub type EdgeArm = bilinear::EdgeArm<f64>;
pub type RidgeState = estimator::RidgeState<f64>;
pub type ConfidenceParams = estimator::ConfidenceParams<f64>;
pub type Problem = policy::Problem<f64>;
pub type RoundLog = policy::RoundLog<f64>;
pub type PairChoice = policy::PairChoice<f64>;

pub type ArmSetF32 = bilinear::ArmSet<f32>;
pub type EnvironmentSpecF32 = bilinear::EnvironmentSpec<f32>;
pub type RidgeStateF32 = estimator::RidgeState<f32>;
pub type ProblemF32 = policy::Problem<f32>;
