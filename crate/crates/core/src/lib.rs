//! Super-vertex random graphs G(N, K, p).
//!
//! `N` super-vertices with sizes given by a configuration `K` are joined when
//! at least one underlying G(n, p) edge runs between them, so a pair of sizes
//! `i`, `j` is adjacent with probability `1 - (1 - p)^(ij)`. This crate
//! samples the model, analyzes components and degrees, evaluates the exact
//! and limiting predictions, and runs seeded Monte Carlo experiments that
//! compare the two.

// `!(x >= 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod graph;
pub mod montecarlo;
pub mod rng;
pub mod sampler;
pub mod theory;

pub use config::{ConfigError, LimitProfile, PowerLawScheme, SizeConfiguration};
pub use graph::{
    connected_components, degree_histogram, is_connected, isolated_count,
    largest_component_fraction, ComponentSummary, DisjointSetForest,
};
pub use montecarlo::{
    run_experiment, total_variation, Estimate, ExperimentKind, ExperimentPlan, ExperimentReport,
    MonteCarloError,
};
pub use rng::Seed;
pub use sampler::{
    edge_probability, resolve_p, sample_constructive, sample_direct, ModelParams, Regime,
    SamplerError, SuperGraph,
};
pub use theory::{ConnectivityRegime, GiantSolution, TheoryError};
